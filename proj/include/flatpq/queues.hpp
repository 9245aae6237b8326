#pragma once

// Concurrent priority queues sharing one interface:
//
//   auto h = queue.attach();           // per-thread registration
//   h.insert(x);
//   std::optional<key_type> m = h.extract_min();
//   heap_snapshot s = queue.quiesce(); // only with no operation in flight
//
// flat_parallel_queue  flat combining whose combiner splits each round into
//                      parallel bulk extract / bulk insert phases executed by
//                      the waiting threads
// fc_sequential_queue  flat combining, combiner runs every request itself
// coarse_lock_queue    one mutex around the heap, classic insert

#include <algorithm>
#include <atomic>
#include <concepts>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "flatpq/backoff.hpp"
#include "flatpq/bulk_extract.hpp"
#include "flatpq/bulk_insert.hpp"
#include "flatpq/executor.hpp"
#include "flatpq/heap.hpp"
#include "flatpq/publication_list.hpp"
#include "flatpq/random.hpp"
#include "flatpq/round.hpp"

namespace flatpq {

struct heap_snapshot {
  std::vector<key_type> values;
  bool heap_valid = false;
  bool flags_clear = false;
};

inline heap_snapshot snapshot_of(const binary_heap& heap) {
  return {std::vector<key_type>(heap.values().begin(), heap.values().end()), heap.is_valid(), heap.flags_clear()};
}

struct queue_options {
  std::size_t initial_capacity = 1024;
  /// Fixed publication records; more threads use the overflow chain.
  std::size_t max_threads = 64;
  bool allow_overflow = true;
  /// Run single-task phases as plain sequential heap operations.
  bool single_task_fallback = true;
};

template <class Q>
concept concurrent_priority_queue = requires(Q& q) {
  { q.attach() };
  { q.quiesce() } -> std::same_as<heap_snapshot>;
  { Q::name } -> std::convertible_to<std::string_view>;
} && requires(decltype(std::declval<Q&>().attach())& h, key_type k) {
  h.insert(k);
  { h.extract_min() } -> std::same_as<std::optional<key_type>>;
};

/// Publication list, combiner election and the owner-side wait loop shared by
/// both flat-combining queues. Derived provides combine(request_slot& self),
/// called with the combiner lock held.
template <class Derived>
class flat_combining_queue {
 public:
  class handle {
   public:
    handle(handle&& other) noexcept : queue_(other.queue_), slot_(std::exchange(other.slot_, nullptr)) {}
    handle& operator=(handle&&) = delete;
    handle(const handle&) = delete;
    ~handle() {
      if (slot_) queue_->pubs_.deregister(slot_);
    }

    void insert(key_type x) { queue_->execute(*slot_, request_kind::insert, x); }
    std::optional<key_type> extract_min() { return queue_->execute(*slot_, request_kind::extract_min, 0); }

    std::size_t owner() const noexcept { return slot_->owner; }

   private:
    friend class flat_combining_queue;
    handle(flat_combining_queue* q, request_slot* s) : queue_(q), slot_(s) {}
    flat_combining_queue* queue_;
    request_slot* slot_;
  };

  handle attach() {
    request_slot* slot = pubs_.register_thread();
    if (!slot) throw std::length_error("publication list full");
    return handle(this, slot);
  }

  heap_snapshot quiesce() {
    spin_backoff backoff;
    while (!lock_.try_acquire()) backoff.pause();
    heap_snapshot s = snapshot_of(heap_);
    lock_.release();
    return s;
  }

  bool try_acquire_combiner() noexcept { return lock_.try_acquire(); }
  void release_combiner() noexcept { lock_.release(); }

  std::size_t rounds() const noexcept { return rounds_.load(std::memory_order_relaxed); }

 protected:
  explicit flat_combining_queue(const queue_options& opts)
      : heap_(opts.initial_capacity), pubs_(opts.max_threads, opts.allow_overflow) {}

  static void finish(request_slot& r) noexcept { r.status.store(request_status::finished, std::memory_order_release); }

  binary_heap heap_;
  publication_list pubs_;
  combiner_lock lock_;
  std::atomic<std::size_t> rounds_{0};

 private:
  std::optional<key_type> execute(request_slot& slot, request_kind kind, key_type value) {
    publish_request(slot, kind, value);
    spin_backoff backoff;
    for (;;) {
      const request_status st = slot.status.load(std::memory_order_acquire);
      if (st == request_status::finished) break;
      if (st == request_status::sift) {
        const task_assignment a = slot.assignment;
        a.run(a.task);
        slot.status.store(request_status::finished, std::memory_order_release);
        a.pending->fetch_sub(1, std::memory_order_release);
        break;
      }
      if (!lock_.is_held() && lock_.try_acquire()) {
        static_cast<Derived*>(this)->combine(slot);
        rounds_.fetch_add(1, std::memory_order_relaxed);
        lock_.release();
        backoff.reset();
        continue;
      }
      backoff.pause();
    }
    std::optional<key_type> result;
    if (slot.has_result) result = slot.value;
    slot.status.store(request_status::idle, std::memory_order_relaxed);
    return result;
  }
};

class flat_parallel_queue : public flat_combining_queue<flat_parallel_queue> {
 public:
  static constexpr std::string_view name = "flat-parallel";

  explicit flat_parallel_queue(queue_options opts = {}) : flat_combining_queue(opts), fallback_(opts.single_task_fallback) {}

  /// Phases that ran more than one task, and the largest round seen.
  std::size_t parallel_phases() const noexcept { return parallel_phases_.load(std::memory_order_relaxed); }
  std::size_t largest_round() const noexcept { return largest_round_.load(std::memory_order_relaxed); }

 private:
  friend class flat_combining_queue<flat_parallel_queue>;

  void combine(request_slot& self) {
    collect_and_sort(pubs_, extracts_, inserts_);
    if (extracts_.size() + inserts_.size() > largest_round_.load(std::memory_order_relaxed))
      largest_round_.store(extracts_.size() + inserts_.size(), std::memory_order_relaxed);
    if (fallback_ && extracts_.size() + inserts_.size() == 1) {
      request_slot& r = extracts_.empty() ? *inserts_[0] : *extracts_[0];
      if (r.kind == request_kind::insert) {
        heap_.insert_path(r.value);
      } else if (auto m = heap_.extract_min()) {
        r.value = *m;
        r.has_result = true;
      }
      finish(r);
      return;
    }
    insert_values_.clear();
    for (const request_slot* r : inserts_) insert_values_.push_back(r->value);

    batch_plan plan = plan_round(heap_, extracts_.size(), insert_values_, xbatch_);
    for (std::size_t i = 0; i < extracts_.size(); ++i) {
      extracts_[i]->has_result = plan.extract_results[i].has_value();
      if (plan.extract_results[i]) extracts_[i]->value = *plan.extract_results[i];
    }
    for (std::size_t i = 0; i < plan.eliminated; ++i)
      if (inserts_[i] != &self) finish(*inserts_[i]);

    // Extract phase.
    auto sifts = xbatch_.tasks();
    if (fallback_ && sifts.size() == 1) {
      const slot_index start = sifts[0].position();
      heap_.flags(start).fetch_and(static_cast<std::uint8_t>(~node_flag::locked), std::memory_order_relaxed);
      heap_.sift_down(start);
      finish_all(extracts_, self);
    } else {
      run_phase(sifts, extracts_, self);
    }

    // Insert phase.
    const std::span<request_slot*> remaining = std::span(inserts_).subspan(plan.eliminated);
    if (!remaining.empty()) {
      if (fallback_ && remaining.size() == 1) {
        heap_.insert_path(plan.remaining_inserts.front());
        finish_all(remaining, self);
      } else {
        ibatch_.prepare(heap_, plan.remaining_inserts, std::move(plan.splits));
        run_phase(ibatch_.tasks(), remaining, self);
      }
    }
    finish(self);
  }

  void finish_all(std::span<request_slot* const> requests, const request_slot& self) {
    for (request_slot* r : requests)
      if (r != &self) finish(*r);
  }

  /// The leader keeps task 0 and hands one task to each waiting owner in
  /// `requests`. Tasks left over for lack of owners are stepped by the leader
  /// alongside its own; owners left over for lack of tasks finish at once.
  template <class Task>
  void run_phase(std::span<Task> tasks, std::span<request_slot* const> requests, const request_slot& self) {
    if (tasks.empty()) {
      finish_all(requests, self);
      return;
    }
    if (tasks.size() > 1) parallel_phases_.fetch_add(1, std::memory_order_relaxed);
    workers_.clear();
    for (request_slot* r : requests)
      if (r != &self) workers_.push_back(r);
    const std::size_t assigned = std::min(workers_.size(), tasks.size() - 1);
    pending_.store(assigned, std::memory_order_relaxed);
    for (std::size_t i = 0; i < assigned; ++i) {
      workers_[i]->assignment = task_assignment::of(tasks[i + 1], pending_);
      workers_[i]->status.store(request_status::sift, std::memory_order_release);
    }
    for (std::size_t i = assigned; i < workers_.size(); ++i) finish(*workers_[i]);

    if (assigned + 1 == tasks.size()) {
      run_to_completion(tasks[0]);
    } else {
      std::vector<Task*> own{&tasks[0]};
      for (std::size_t i = assigned + 1; i < tasks.size(); ++i) own.push_back(&tasks[i]);
      run_interleaved<Task>(own);
    }

    spin_backoff backoff;
    while (pending_.load(std::memory_order_acquire) != 0) backoff.pause();
  }

  bool fallback_;
  std::vector<request_slot*> extracts_;
  std::vector<request_slot*> inserts_;
  std::vector<request_slot*> workers_;
  std::vector<key_type> insert_values_;
  extract_batch xbatch_;
  insert_batch ibatch_;
  std::atomic<std::size_t> pending_{0};
  std::atomic<std::size_t> parallel_phases_{0};
  std::atomic<std::size_t> largest_round_{0};
};

class fc_sequential_queue : public flat_combining_queue<fc_sequential_queue> {
 public:
  static constexpr std::string_view name = "fc-sequential";

  explicit fc_sequential_queue(queue_options opts = {}) : flat_combining_queue(opts) {}

 private:
  friend class flat_combining_queue<fc_sequential_queue>;

  void combine(request_slot& self) {
    pubs_.drain([&](request_slot& r) {
      if (r.kind == request_kind::insert) {
        heap_.insert_path(r.value);
      } else if (auto m = heap_.extract_min()) {
        r.value = *m;
        r.has_result = true;
      }
      if (&r != &self) finish(r);
    });
    finish(self);
  }
};

class coarse_lock_queue {
 public:
  static constexpr std::string_view name = "coarse-lock";

  explicit coarse_lock_queue(queue_options opts = {}) : heap_(opts.initial_capacity) {}

  class handle {
   public:
    void insert(key_type x) {
      std::lock_guard lock(queue_->mutex_);
      queue_->heap_.insert_classic(x);
    }
    std::optional<key_type> extract_min() {
      std::lock_guard lock(queue_->mutex_);
      return queue_->heap_.extract_min();
    }

   private:
    friend class coarse_lock_queue;
    explicit handle(coarse_lock_queue* q) : queue_(q) {}
    coarse_lock_queue* queue_;
  };

  handle attach() { return handle(this); }

  heap_snapshot quiesce() {
    std::lock_guard lock(mutex_);
    return snapshot_of(heap_);
  }

 private:
  std::mutex mutex_;
  binary_heap heap_;
};

static_assert(concurrent_priority_queue<flat_parallel_queue>);
static_assert(concurrent_priority_queue<fc_sequential_queue>);
static_assert(concurrent_priority_queue<coarse_lock_queue>);

/// Fills an empty queue with n keys drawn uniformly from [0, key_range).
/// Returns the inserted keys.
template <concurrent_priority_queue Q>
std::vector<key_type> prepopulate(Q& q, std::size_t n, key_type key_range, std::uint64_t seed) {
  if (!q.quiesce().values.empty()) throw std::logic_error("prepopulate: queue is not empty");
  key_generator gen(seed);
  std::vector<key_type> keys(n);
  for (auto& k : keys) k = gen.uniform(key_range);
  auto h = q.attach();
  for (key_type k : keys) h.insert(k);
  return keys;
}

}  // namespace flatpq
