#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

#include "flatpq/heap.hpp"

namespace flatpq {

/// The sorted set of values an insert traversal carries down the heap.
/// Batches are at most a few dozen keys, so a contiguous sorted buffer with
/// linear shifts beats any node-based structure here. Popping the minimum
/// only advances a head offset; the freed prefix is reused by insert().
class ordered_key_set {
 public:
  ordered_key_set() = default;
  explicit ordered_key_set(std::vector<key_type> keys) : keys_(std::move(keys)) {
    std::sort(keys_.begin(), keys_.end());
  }

  void reserve(std::size_t n) { keys_.reserve(n); }

  void clear() noexcept {
    keys_.clear();
    head_ = 0;
  }

  /// Replaces the contents with an already sorted range.
  void assign_sorted(std::span<const key_type> sorted) {
    assert(std::is_sorted(sorted.begin(), sorted.end()));
    keys_.assign(sorted.begin(), sorted.end());
    head_ = 0;
  }

  std::size_t size() const noexcept { return keys_.size() - head_; }
  bool empty() const noexcept { return size() == 0; }
  key_type min() const noexcept { return keys_[head_]; }
  std::span<const key_type> view() const noexcept { return {keys_.data() + head_, size()}; }

  key_type pop_min() noexcept {
    assert(!empty());
    return keys_[head_++];
  }

  void insert(key_type x) {
    auto first = keys_.begin() + static_cast<std::ptrdiff_t>(head_);
    auto pos = std::upper_bound(first, keys_.end(), x);
    if (head_ > 0) {
      // Shift the smaller prefix one step into the free slot before it.
      std::move(first, pos, first - 1);
      *(pos - 1) = x;
      --head_;
    } else {
      keys_.insert(pos, x);
    }
  }

  /// Removes the minimum and inserts x in one pass. Returns the old minimum.
  key_type exchange_min(key_type x) noexcept {
    assert(!empty());
    const key_type old = keys_[head_];
    std::size_t i = head_;
    while (i + 1 < keys_.size() && keys_[i + 1] < x) {
      keys_[i] = keys_[i + 1];
      ++i;
    }
    keys_[i] = x;
    return old;
  }

  /// Keeps the `keep` smallest values and moves the rest into `rest`,
  /// replacing its contents. Does not allocate if `rest` has the capacity.
  void split_off(std::size_t keep, ordered_key_set& rest) {
    assert(keep <= size());
    const auto cut = keys_.begin() + static_cast<std::ptrdiff_t>(head_ + keep);
    rest.keys_.assign(cut, keys_.end());
    rest.head_ = 0;
    keys_.erase(cut, keys_.end());
  }

  void swap(ordered_key_set& other) noexcept {
    keys_.swap(other.keys_);
    std::swap(head_, other.head_);
  }

 private:
  std::vector<key_type> keys_;
  std::size_t head_ = 0;
};

}  // namespace flatpq
