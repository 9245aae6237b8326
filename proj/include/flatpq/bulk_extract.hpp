#pragma once

// k-way extractMin: the k smallest values are swapped out for refill values
// and one sift-down per vacated slot restores the heap. Concurrent sift-downs
// coordinate only through the per-slot locked flag: a sift waits while a
// child of its current slot is locked, and only the owner of a slot may lock
// that slot's children.

#include <algorithm>
#include <array>
#include <cassert>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flatpq/heap.hpp"
#include "flatpq/step_trace.hpp"

namespace flatpq {

enum class step_result { progressed, blocked, finished };

struct extract_plan {
  /// The k smallest values, ascending by (value, slot).
  std::vector<slot_value> victims;
  /// Victim slots that remain inside the heap after the batch, in victim
  /// order. Each is locked and holds its refill value.
  std::vector<slot_index> sift_starts;
  std::size_t replacements_used = 0;
  std::size_t old_size = 0;
  std::size_t new_size = 0;
  /// Every slot the planner read or wrote.
  std::vector<slot_index> examined;
};

/// Picks the k smallest values and refills their slots. The i-th smallest
/// victim that survives the size cut receives the i-th (sorted) replacement,
/// then the surviving tail values in ascending slot order. Victims in the
/// vacated tail simply disappear. No sift runs here.
inline extract_plan plan_extract_batch(binary_heap& heap, std::size_t k, std::span<const key_type> replacements) {
  if (k > heap.size())
    throw std::out_of_range("plan_extract_batch: k=" + std::to_string(k) + " exceeds size " +
                            std::to_string(heap.size()));
  if (replacements.size() > k)
    throw std::invalid_argument("plan_extract_batch: more replacements than extracted values");

  extract_plan plan;
  plan.old_size = heap.size();
  plan.replacements_used = replacements.size();
  plan.new_size = heap.size() - (k - replacements.size());
  if (k == 0) return plan;

  plan.victims = heap.find_k_smallest(k, &plan.examined);

  std::vector<key_type> sources(replacements.begin(), replacements.end());
  std::sort(sources.begin(), sources.end());

  std::vector<bool> tail_victim(plan.old_size - plan.new_size, false);
  for (const auto& victim : plan.victims) {
    if (victim.slot > plan.new_size)
      tail_victim[victim.slot - plan.new_size - 1] = true;
    else
      plan.sift_starts.push_back(victim.slot);
  }
  for (slot_index s = plan.new_size + 1; s <= plan.old_size; ++s) {
    plan.examined.push_back(s);
    if (!tail_victim[s - plan.new_size - 1]) sources.push_back(heap.at(s));
  }
  assert(sources.size() == plan.sift_starts.size());

  for (slot_index s : plan.sift_starts) heap.flags(s).fetch_or(node_flag::locked, std::memory_order_relaxed);
  for (std::size_t i = 0; i < plan.sift_starts.size(); ++i) heap.at(plan.sift_starts[i]) = sources[i];
  heap.set_size(plan.new_size);
  return plan;
}

/// One locked sift-down, as a resumable step machine. Each step is a single
/// slot visit or a failed wait.
class sift_task {
 public:
  sift_task(binary_heap& heap, slot_index start) noexcept : heap_(&heap), node_(start) {}

  slot_index position() const noexcept { return node_; }
  bool finished() const noexcept { return done_; }
  bool can_progress() const noexcept { return !done_ && blocking_child() == 0; }
  /// The locked child this task would wait on, or 0.
  slot_index awaited() const noexcept { return done_ ? 0 : blocking_child(); }

  template <class Recorder>
  step_result step(Recorder& rec) {
    assert(!done_);
    binary_heap& h = *heap_;
    const slot_index v = node_;
    const std::size_t n = h.size();
    assert(h.is_locked(v, std::memory_order_relaxed) && "sift step on a slot it does not own");

    if (const slot_index c = blocking_child()) {
      if constexpr (Recorder::enabled) rec.wait_locked(v, c);
      return step_result::blocked;
    }

    const slot_index left = 2 * v;
    const slot_index right = left + 1;
    if (left > n) {
      unlock(v);
      if constexpr (Recorder::enabled) record(rec, v, {v}, {v});
      done_ = true;
      return step_result::finished;
    }
    slot_index child = left;
    if (right <= n && h.at(right) < h.at(left)) child = right;

    if (h.at(v) <= h.at(child)) {
      unlock(v);
      if constexpr (Recorder::enabled) record(rec, v, children(v, n), {v});
      done_ = true;
      return step_result::finished;
    }

    h.flags(child).fetch_or(node_flag::locked, std::memory_order_relaxed);
    std::swap(h.at(v), h.at(child));
    unlock(v);
    if constexpr (Recorder::enabled) record(rec, v, children(v, n), {v, child});
    node_ = child;
    return step_result::progressed;
  }

 private:
  slot_index blocking_child() const noexcept {
    const slot_index left = 2 * node_;
    const std::size_t n = heap_->size();
    if (left <= n && heap_->is_locked(left)) return left;
    if (left + 1 <= n && heap_->is_locked(left + 1)) return left + 1;
    return 0;
  }

  void unlock(slot_index v) noexcept {
    heap_->flags(v).fetch_and(static_cast<std::uint8_t>(~node_flag::locked), std::memory_order_release);
  }

  struct slot_list {
    std::array<slot_index, 3> items{};
    std::size_t count = 0;
    slot_list(std::initializer_list<slot_index> il) {
      for (slot_index s : il) items[count++] = s;
    }
    std::span<const slot_index> view() const noexcept { return {items.data(), count}; }
  };

  static slot_list children(slot_index v, std::size_t n) {
    if (2 * v + 1 <= n) return {v, 2 * v, 2 * v + 1};
    return {v, 2 * v};
  }

  template <class Recorder>
  static void record(Recorder& rec, slot_index v, const slot_list& reads, const slot_list& writes) {
    rec.visit(v, reads.view(), writes.view());
  }

  binary_heap* heap_;
  slot_index node_;
  bool done_ = false;
};

/// Planned extract batch plus its sift tasks. Reusable across rounds.
class extract_batch {
 public:
  void prepare(binary_heap& heap, std::size_t k, std::span<const key_type> replacements) {
    plan_ = plan_extract_batch(heap, k, replacements);
    tasks_.clear();
    tasks_.reserve(plan_.sift_starts.size());
    for (slot_index s : plan_.sift_starts) tasks_.emplace_back(heap, s);
  }

  const extract_plan& plan() const noexcept { return plan_; }
  std::span<sift_task> tasks() noexcept { return tasks_; }

 private:
  extract_plan plan_;
  std::vector<sift_task> tasks_;
};

/// Removes and returns the k smallest values, ascending. `replacements`
/// (r <= k values) take the place of r tail values.
template <class Executor>
std::vector<key_type> bulk_extract(binary_heap& heap, std::size_t k, std::span<const key_type> replacements,
                                   Executor& exec) {
  extract_batch batch;
  batch.prepare(heap, k, replacements);
  exec.run(batch.tasks());
  std::vector<key_type> out;
  out.reserve(k);
  for (const auto& v : batch.plan().victims) out.push_back(v.value);
  return out;
}

}  // namespace flatpq
