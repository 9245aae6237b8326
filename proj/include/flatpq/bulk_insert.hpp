#pragma once

// k-way insert. The new values all belong somewhere on the paths from the
// root to the target slots size+1 .. size+k. One traversal starts at the root
// carrying every value; at each split node it keeps the part destined for the
// left subtree and hands the rest to a helper parked at that node.

#include <atomic>
#include <cassert>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "flatpq/bulk_extract.hpp"
#include "flatpq/heap.hpp"
#include "flatpq/ordered_key_set.hpp"
#include "flatpq/split_map.hpp"
#include "flatpq/step_trace.hpp"

namespace flatpq {

/// Single-producer single-consumer handoff at one split node.
struct handoff_mailbox {
  std::atomic<bool> ready{false};
  ordered_key_set keys;
};

class insert_batch;

class insert_task {
 public:
  insert_task() = default;

  slot_index position() const noexcept { return node_; }
  bool finished() const noexcept { return done_; }
  bool waiting() const noexcept { return waiting_; }
  bool can_progress() const noexcept;
  std::span<const key_type> carried() const noexcept { return keys_.view(); }

  template <class Recorder>
  step_result step(Recorder& rec);

 private:
  friend class insert_batch;

  void reset_root(insert_batch& batch, std::span<const key_type> sorted) {
    batch_ = &batch;
    node_ = 1;
    station_ = 0;
    waiting_ = false;
    done_ = false;
    keys_.assign_sorted(sorted);
  }

  void reset_helper(insert_batch& batch, std::size_t station, std::size_t expected) {
    batch_ = &batch;
    node_ = 0;
    station_ = station;
    waiting_ = true;
    done_ = false;
    keys_.clear();
    keys_.reserve(expected);
  }

  insert_batch* batch_ = nullptr;
  slot_index node_ = 0;
  std::size_t station_ = 0;
  bool waiting_ = false;
  bool done_ = false;
  ordered_key_set keys_;
};

/// Planned insert batch: split flags set, size advanced, one root traversal
/// plus one helper per split node. Reusable across rounds; must not move
/// while its tasks run.
class insert_batch {
 public:
  insert_batch() = default;
  insert_batch(const insert_batch&) = delete;
  insert_batch& operator=(const insert_batch&) = delete;

  void prepare(binary_heap& heap, std::span<const key_type> values) {
    if (values.empty()) throw std::invalid_argument("bulk_insert: empty batch");
    heap.reserve(heap.size() + values.size());
    prepare(heap, values, compute_split_nodes(heap.size(), values.size()));
  }

  /// `splits` must be compute_split_nodes(heap.size(), values.size()).
  void prepare(binary_heap& heap, std::span<const key_type> values, split_map splits) {
    if (values.empty()) throw std::invalid_argument("bulk_insert: empty batch");
    assert(splits.base_size() == heap.size() && splits.target_count() == values.size());
    heap.reserve(heap.size() + values.size());
    heap_ = &heap;
    splits_ = std::move(splits);

    const std::size_t stations = splits_.size();
    if (stations > mailbox_capacity_) {
      mailboxes_ = std::make_unique<handoff_mailbox[]>(stations);
      mailbox_capacity_ = stations;
    }
    for (std::size_t i = 0; i < stations; ++i) {
      const auto& e = splits_.entries()[i];
      mailboxes_[i].ready.store(false, std::memory_order_relaxed);
      mailboxes_[i].keys.clear();
      mailboxes_[i].keys.reserve(e.right_targets);
      heap.flags(e.slot).fetch_or(node_flag::split, std::memory_order_relaxed);
    }

    sorted_.assign(values.begin(), values.end());
    std::sort(sorted_.begin(), sorted_.end());
    tasks_.resize(stations + 1);
    tasks_[0].reset_root(*this, sorted_);
    for (std::size_t i = 0; i < stations; ++i) tasks_[i + 1].reset_helper(*this, i, splits_.entries()[i].right_targets);

    heap.set_size(splits_.last_target());
  }

  std::span<insert_task> tasks() noexcept { return tasks_; }
  const split_map& splits() const noexcept { return splits_; }
  binary_heap& heap() noexcept { return *heap_; }
  handoff_mailbox& mailbox(std::size_t station) noexcept { return mailboxes_[station]; }
  const handoff_mailbox& mailbox(std::size_t station) const noexcept { return mailboxes_[station]; }

 private:
  binary_heap* heap_ = nullptr;
  split_map splits_;
  std::unique_ptr<handoff_mailbox[]> mailboxes_;
  std::size_t mailbox_capacity_ = 0;
  std::vector<key_type> sorted_;
  std::vector<insert_task> tasks_;
};

inline bool insert_task::can_progress() const noexcept {
  if (done_) return false;
  if (!waiting_) return true;
  return batch_->mailbox(station_).ready.load(std::memory_order_acquire);
}

template <class Recorder>
step_result insert_task::step(Recorder& rec) {
  assert(!done_);
  binary_heap& h = batch_->heap();
  const split_map& splits = batch_->splits();

  if (waiting_) {
    handoff_mailbox& mb = batch_->mailbox(station_);
    const slot_index station = splits.entries()[station_].slot;
    if (!mb.ready.load(std::memory_order_acquire)) {
      if constexpr (Recorder::enabled) rec.wait_handoff(station);
      return step_result::blocked;
    }
    keys_.swap(mb.keys);
    node_ = 2 * station + 1;
    waiting_ = false;
    if constexpr (Recorder::enabled) rec.receive(station);
  }

  const slot_index v = node_;
  assert(!keys_.empty());
  if (v > splits.base_size()) {
    // A fresh target slot: the smallest carried value settles here.
    h.at(v) = keys_.pop_min();
  } else if (keys_.min() < h.at(v)) {
    h.at(v) = keys_.exchange_min(h.at(v));
  }
  if constexpr (Recorder::enabled) {
    if (!keys_.empty() && keys_.min() < h.at(v)) rec.violation();
    const slot_index here[1] = {v};
    rec.visit(v, here, here);
  }

  if (keys_.empty()) {
    done_ = true;
    return step_result::finished;
  }

  if (h.flags(v).load(std::memory_order_acquire) & node_flag::split) {
    const std::size_t station = splits.index_of(v);
    assert(station < splits.size());
    const split_entry& e = splits.entries()[station];
    handoff_mailbox& mb = batch_->mailbox(station);
    keys_.split_off(e.left_targets, mb.keys);
    mb.ready.store(true, std::memory_order_release);
    h.flags(v).fetch_and(static_cast<std::uint8_t>(~node_flag::split), std::memory_order_release);
    if constexpr (Recorder::enabled) rec.send(v);
    node_ = 2 * v;
  } else {
    node_ = splits.targets_below(2 * v) > 0 ? 2 * v : 2 * v + 1;
  }
  assert(keys_.size() == splits.targets_below(node_));
  return step_result::progressed;
}

/// Inserts every value in `values` as one batch.
template <class Executor>
void bulk_insert(binary_heap& heap, std::span<const key_type> values, Executor& exec) {
  insert_batch batch;
  batch.prepare(heap, values);
  exec.run(batch.tasks());
}

}  // namespace flatpq
