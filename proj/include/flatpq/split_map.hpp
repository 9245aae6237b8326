#pragma once

// Split nodes of a bulk insert: the slots whose two child subtrees both
// contain some of the new target slots size+1 .. size+k.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "flatpq/heap.hpp"

namespace flatpq {

/// Number of slots in [first, last] that lie in the subtree rooted at v
/// (v itself included).
inline std::size_t targets_in_subtree(slot_index v, slot_index first, slot_index last) noexcept {
  if (first > last || v > last) return 0;
  std::size_t count = 0;
  const unsigned top = slot_depth(v);
  const unsigned bottom = slot_depth(last);
  for (unsigned level = std::max(top, slot_depth(first)); level <= bottom; ++level) {
    const unsigned shift = level - top;
    const slot_index lo = std::max(v << shift, first);
    const slot_index hi = std::min(((v + 1) << shift) - 1, last);
    if (lo <= hi) count += hi - lo + 1;
  }
  return count;
}

struct split_entry {
  slot_index slot = 0;
  std::size_t left_targets = 0;
  std::size_t right_targets = 0;

  friend bool operator==(const split_entry&, const split_entry&) = default;
};

class split_map {
 public:
  split_map() = default;
  split_map(std::size_t base_size, std::size_t count, std::vector<split_entry> entries)
      : base_size_(base_size), count_(count), entries_(std::move(entries)) {}

  std::size_t base_size() const noexcept { return base_size_; }
  std::size_t target_count() const noexcept { return count_; }
  slot_index first_target() const noexcept { return base_size_ + 1; }
  slot_index last_target() const noexcept { return base_size_ + count_; }

  /// Entries ascending by slot.
  const std::vector<split_entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Index of the entry for `slot`, or size() when `slot` is not a split node.
  std::size_t index_of(slot_index slot) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), slot,
                               [](const split_entry& e, slot_index s) { return e.slot < s; });
    if (it == entries_.end() || it->slot != slot) return entries_.size();
    return static_cast<std::size_t>(it - entries_.begin());
  }

  std::size_t targets_below(slot_index v) const noexcept {
    return targets_in_subtree(v, first_target(), last_target());
  }

  friend bool operator==(const split_map&, const split_map&) = default;

 private:
  std::size_t base_size_ = 0;
  std::size_t count_ = 0;
  std::vector<split_entry> entries_;
};

/// Walks the union of root-to-target paths for targets size+1 .. size+k.
/// When no target is an ancestor of another (k <= size + 1) there are
/// exactly k - 1 entries; for smaller heaps a target may sit above other
/// targets and absorbs one value itself, so fewer entries exist.
inline split_map compute_split_nodes(std::size_t size, std::size_t k) {
  if (k == 0) throw std::invalid_argument("compute_split_nodes: k must be positive");
  const slot_index first = size + 1;
  const slot_index last = size + k;
  std::vector<split_entry> entries;
  entries.reserve(k - 1);
  std::vector<slot_index> stack{1};
  while (!stack.empty()) {
    const slot_index v = stack.back();
    stack.pop_back();
    const std::size_t left = targets_in_subtree(2 * v, first, last);
    const std::size_t right = targets_in_subtree(2 * v + 1, first, last);
    if (left > 0 && right > 0) entries.push_back({v, left, right});
    if (right > 0) stack.push_back(2 * v + 1);
    if (left > 0) stack.push_back(2 * v);
  }
  std::sort(entries.begin(), entries.end(), [](const split_entry& a, const split_entry& b) { return a.slot < b.slot; });
  return split_map(size, k, std::move(entries));
}

}  // namespace flatpq
