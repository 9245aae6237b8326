#pragma once

// Array-based binary min-heap used as the shared storage of every queue in
// this library. Slots are 1-indexed: slot v has children 2v and 2v+1.
//
// All member functions assume exclusive access. The per-slot flag words are
// the one exception: they are atomics so the bulk kernels can coordinate
// workers on a heap that is otherwise owned by the combiner.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flatpq {

using key_type = std::int64_t;
using slot_index = std::size_t;

namespace node_flag {
inline constexpr std::uint8_t locked = 0x1;
inline constexpr std::uint8_t split = 0x2;
}  // namespace node_flag

struct slot_value {
  slot_index slot = 0;
  key_type value = 0;

  friend bool operator==(const slot_value&, const slot_value&) = default;
};

enum class growth_policy { grow, fixed };

/// Depth of a slot, the root being at depth 0.
constexpr unsigned slot_depth(slot_index v) noexcept {
  return static_cast<unsigned>(std::bit_width(v)) - 1;
}

class binary_heap {
 public:
  explicit binary_heap(std::size_t capacity, growth_policy growth = growth_policy::grow)
      : growth_(growth) {
    if (capacity == 0) throw std::invalid_argument("binary_heap: capacity must be positive");
    allocate(capacity);
  }

  binary_heap(const binary_heap& other)
      : size_(other.size_), growth_(other.growth_) {
    allocate(other.capacity_);
    std::copy_n(other.values_.begin(), size_ + 1, values_.begin());
    for (slot_index v = 1; v <= capacity_; ++v)
      flags_[v].store(other.flags_[v].load(std::memory_order_relaxed), std::memory_order_relaxed);
  }

  binary_heap& operator=(const binary_heap& other) {
    if (this != &other) {
      binary_heap copy(other);
      swap(copy);
    }
    return *this;
  }

  binary_heap(binary_heap&& other) noexcept { swap(other); }
  binary_heap& operator=(binary_heap&& other) noexcept {
    swap(other);
    return *this;
  }

  ~binary_heap() = default;

  void swap(binary_heap& other) noexcept {
    using std::swap;
    swap(values_, other.values_);
    swap(flags_, other.flags_);
    swap(size_, other.size_);
    swap(capacity_, other.capacity_);
    swap(growth_, other.growth_);
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return size_ == 0; }
  growth_policy growth() const noexcept { return growth_; }

  /// Occupied values, slot 1 first.
  std::span<const key_type> values() const noexcept { return {values_.data() + 1, size_}; }

  key_type& at(slot_index v) noexcept { return values_[v]; }
  key_type at(slot_index v) const noexcept { return values_[v]; }

  std::atomic<std::uint8_t>& flags(slot_index v) noexcept { return flags_[v]; }
  const std::atomic<std::uint8_t>& flags(slot_index v) const noexcept { return flags_[v]; }

  bool is_locked(slot_index v, std::memory_order order = std::memory_order_acquire) const noexcept {
    return (flags_[v].load(order) & node_flag::locked) != 0;
  }

  /// Used by the bulk planners, which move the size boundary before their
  /// workers start. Slots above the new size become unobserved.
  void set_size(std::size_t n) {
    if (n > capacity_) throw std::length_error("binary_heap: size exceeds capacity");
    size_ = n;
  }

  /// Ensures at least `slots` slots exist. Doubles the capacity when growing.
  /// Requires quiescence: the flag words are reallocated.
  void reserve(std::size_t slots) {
    if (slots <= capacity_) return;
    if (growth_ == growth_policy::fixed)
      throw std::length_error("binary_heap: capacity exhausted (" + std::to_string(capacity_) + ")");
    std::size_t next = capacity_;
    while (next < slots) next *= 2;
    binary_heap grown(next, growth_);
    std::copy_n(values_.begin(), size_ + 1, grown.values_.begin());
    grown.size_ = size_;
    swap(grown);
  }

  std::optional<key_type> extract_min() {
    if (size_ == 0) return std::nullopt;
    const key_type top = values_[1];
    values_[1] = values_[size_];
    --size_;
    if (size_ > 0) sift_down(1);
    return top;
  }

  /// Restores the heap property of the subtree rooted at v, assuming both
  /// child subtrees already satisfy it. Ties between children go left.
  void sift_down(slot_index v) {
    if (v == 0 || v > size_) throw std::out_of_range("sift_down: slot " + std::to_string(v) + " out of range");
    for (;;) {
      const slot_index left = 2 * v;
      if (left > size_) return;
      slot_index child = left;
      if (left + 1 <= size_ && values_[left + 1] < values_[left]) child = left + 1;
      if (values_[v] <= values_[child]) return;
      std::swap(values_[v], values_[child]);
      v = child;
    }
  }

  /// Insert that walks the whole root-to-(size+1) path carrying the new value
  /// and displacing every larger value one level down. Returns the number of
  /// visited slots, which is always floor(log2(size + 1)) + 1.
  std::size_t insert_path(key_type x) {
    make_room();
    const slot_index target = size_ + 1;
    const unsigned depth = slot_depth(target);
    key_type carried = x;
    std::size_t visits = 0;
    for (unsigned d = 0; d < depth; ++d) {
      const slot_index v = target >> (depth - d);
      if (carried < values_[v]) std::swap(carried, values_[v]);
      ++visits;
    }
    values_[target] = carried;
    ++visits;
    size_ = target;
    return visits;
  }

  /// Textbook append-and-sift-up insert.
  void insert_classic(key_type x) {
    make_room();
    slot_index v = ++size_;
    while (v > 1 && x < values_[v / 2]) {
      values_[v] = values_[v / 2];
      v /= 2;
    }
    values_[v] = x;
  }

  /// The k smallest occupied values with their slots, ascending by
  /// (value, slot). Uses a frontier heap seeded with the root, so only
  /// O(k) slots are examined. If `examined` is given, every slot read is
  /// appended to it.
  std::vector<slot_value> find_k_smallest(std::size_t k, std::vector<slot_index>* examined = nullptr) const {
    if (k > size_)
      throw std::out_of_range("find_k_smallest: k=" + std::to_string(k) + " exceeds size " + std::to_string(size_));
    std::vector<slot_value> out;
    if (k == 0) return out;
    out.reserve(k);
    using entry = std::pair<key_type, slot_index>;
    std::priority_queue<entry, std::vector<entry>, std::greater<>> frontier;
    frontier.emplace(values_[1], 1);
    if (examined) examined->push_back(1);
    while (out.size() < k) {
      const auto [value, slot] = frontier.top();
      frontier.pop();
      out.push_back({slot, value});
      for (slot_index c = 2 * slot; c <= 2 * slot + 1 && c <= size_; ++c) {
        frontier.emplace(values_[c], c);
        if (examined) examined->push_back(c);
      }
    }
    return out;
  }

  /// Heap property on every occupied slot and every flag word clear.
  bool is_valid() const noexcept {
    for (slot_index v = 2; v <= size_; ++v)
      if (values_[v / 2] > values_[v]) return false;
    for (slot_index v = 1; v <= capacity_; ++v)
      if (flags_[v].load(std::memory_order_acquire) != 0) return false;
    return true;
  }

  bool flags_clear() const noexcept {
    for (slot_index v = 1; v <= capacity_; ++v)
      if (flags_[v].load(std::memory_order_acquire) != 0) return false;
    return true;
  }

 private:
  binary_heap() = default;

  void allocate(std::size_t capacity) {
    capacity_ = capacity;
    values_.assign(capacity + 1, 0);
    flags_ = std::make_unique<std::atomic<std::uint8_t>[]>(capacity + 1);
  }

  void make_room() {
    if (size_ < capacity_) return;
    if (growth_ == growth_policy::fixed)
      throw std::length_error("binary_heap: capacity exhausted (" + std::to_string(capacity_) + ")");
    reserve(capacity_ + 1);
  }

  std::vector<key_type> values_;
  std::unique_ptr<std::atomic<std::uint8_t>[]> flags_;
  std::size_t size_ = 0;
  std::size_t capacity_ = 0;
  growth_policy growth_ = growth_policy::grow;
};

/// Multiset of keys, kept as a sorted vector. Used by oracles and the stress
/// ledger.
class key_multiset {
 public:
  key_multiset() = default;
  explicit key_multiset(std::vector<key_type> keys) : keys_(std::move(keys)) { std::sort(keys_.begin(), keys_.end()); }
  explicit key_multiset(std::span<const key_type> keys) : key_multiset(std::vector<key_type>(keys.begin(), keys.end())) {}

  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  std::span<const key_type> sorted() const noexcept { return keys_; }

  void add(key_type k) { keys_.insert(std::upper_bound(keys_.begin(), keys_.end(), k), k); }

  /// Removes one occurrence; false if absent.
  bool remove(key_type k) {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
    if (it == keys_.end() || *it != k) return false;
    keys_.erase(it);
    return true;
  }

  key_multiset& operator+=(const key_multiset& other) {
    std::vector<key_type> merged;
    merged.reserve(keys_.size() + other.keys_.size());
    std::merge(keys_.begin(), keys_.end(), other.keys_.begin(), other.keys_.end(), std::back_inserter(merged));
    keys_ = std::move(merged);
    return *this;
  }

  /// Elements of `a` not matched in `b`, respecting multiplicity.
  friend key_multiset operator-(const key_multiset& a, const key_multiset& b) {
    key_multiset out;
    std::set_difference(a.keys_.begin(), a.keys_.end(), b.keys_.begin(), b.keys_.end(), std::back_inserter(out.keys_));
    return out;
  }

  friend bool operator==(const key_multiset&, const key_multiset&) = default;

 private:
  std::vector<key_type> keys_;
};

inline key_multiset multiset_of(const binary_heap& heap) { return key_multiset(heap.values()); }

}  // namespace flatpq
