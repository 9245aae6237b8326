#pragma once

// Executors run a span of bulk-kernel tasks to completion. A task is any
// type with
//
//   template <class Recorder> step_result step(Recorder&);
//   bool can_progress() const;
//   bool finished() const;
//   slot_index position() const;
//
// thread_executor gives every task its own OS thread. deterministic_executor
// interleaves tasks one step at a time on the calling thread under a seeded
// or scripted schedule and records a step_trace.

#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "flatpq/backoff.hpp"
#include "flatpq/bulk_extract.hpp"
#include "flatpq/step_trace.hpp"

namespace flatpq {

template <class Task>
void run_to_completion(Task& task) {
  null_recorder rec;
  spin_backoff backoff;
  for (;;) {
    switch (task.step(rec)) {
      case step_result::finished: return;
      case step_result::blocked: backoff.pause(); break;
      case step_result::progressed: backoff.reset(); break;
    }
  }
}

/// Steps several tasks round-robin on the calling thread until all finish.
/// Safe for any subset of a batch: waits only ever point at tasks that can
/// still move.
template <class Task>
void run_interleaved(std::span<Task* const> tasks) {
  null_recorder rec;
  spin_backoff backoff;
  std::size_t remaining = 0;
  for (Task* t : tasks) remaining += t->finished() ? 0 : 1;
  while (remaining > 0) {
    bool moved = false;
    for (Task* t : tasks) {
      if (t->finished()) continue;
      const step_result r = t->step(rec);
      if (r == step_result::finished) --remaining;
      moved |= r != step_result::blocked;
    }
    if (moved)
      backoff.reset();
    else
      backoff.pause();
  }
}

/// Task 0 runs on the caller, every other task on a fresh thread.
class thread_executor {
 public:
  template <class Task>
  void run(std::span<Task> tasks) {
    if (tasks.empty()) return;
    std::vector<std::jthread> workers;
    workers.reserve(tasks.size() - 1);
    for (std::size_t i = 1; i < tasks.size(); ++i) workers.emplace_back([&task = tasks[i]] { run_to_completion(task); });
    run_to_completion(tasks[0]);
  }
};

class deadlock_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Round-robin over the live tasks; with probability 1/jitter the cursor
/// jumps to a random live task instead. Picks can land on blocked tasks,
/// which then record a wait.
class jitter_scheduler {
 public:
  explicit jitter_scheduler(std::uint64_t seed, unsigned jitter = 3) : rng_(seed), jitter_(jitter) {}

  std::size_t pick(std::span<const char> runnable) {
    const std::size_t n = runnable.size();
    if (jitter_ > 0 && rng_() % jitter_ == 0)
      cursor_ = static_cast<std::size_t>(rng_() % n);
    else
      cursor_ = (cursor_ + 1) % n;
    return cursor_;
  }

  void phase_started() noexcept { cursor_ = 0; }

 private:
  std::mt19937_64 rng_;
  unsigned jitter_;
  std::size_t cursor_ = 0;
};

/// Follows an explicit list of choices among the runnable tasks; past the end
/// of the script it always takes the first runnable one. Records every
/// decision point, which is what the exhaustive interleaving driver needs.
class scripted_scheduler {
 public:
  explicit scripted_scheduler(std::vector<std::size_t> script = {}) : script_(std::move(script)) {}

  std::size_t pick(std::span<const char> runnable) {
    std::vector<std::size_t> options;
    for (std::size_t i = 0; i < runnable.size(); ++i)
      if (runnable[i]) options.push_back(i);
    const std::size_t choice = position_ < script_.size() ? script_[position_] : 0;
    ++position_;
    if (choice >= options.size()) throw std::out_of_range("scripted_scheduler: choice out of range");
    taken_.push_back(choice);
    branching_.push_back(options.size());
    return options[choice];
  }

  void phase_started() noexcept {}

  /// Choice made at each decision point, and how many options there were.
  const std::vector<std::size_t>& taken() const noexcept { return taken_; }
  const std::vector<std::size_t>& branching() const noexcept { return branching_; }

 private:
  std::vector<std::size_t> script_;
  std::size_t position_ = 0;
  std::vector<std::size_t> taken_;
  std::vector<std::size_t> branching_;
};

template <class Scheduler = jitter_scheduler>
class deterministic_executor {
 public:
  explicit deterministic_executor(Scheduler scheduler, bool keep_events = true)
      : scheduler_(std::move(scheduler)), recorder_(keep_events) {}

  explicit deterministic_executor(std::uint64_t seed, bool keep_events = true)
    requires std::is_same_v<Scheduler, jitter_scheduler>
      : scheduler_(seed), recorder_(keep_events) {}

  /// One phase: all tasks start after everything previously run on this
  /// executor, mirroring the combiner's wait between phases.
  template <class Task>
  void run(std::span<Task> tasks) {
    if (tasks.empty()) return;
    const std::uint32_t base = recorder_.begin_phase(tasks.size());
    scheduler_.phase_started();
    std::vector<std::size_t> live(tasks.size());
    for (std::size_t i = 0; i < live.size(); ++i) live[i] = i;
    std::vector<char> runnable;

    while (!live.empty()) {
      runnable.assign(live.size(), 0);
      bool any = false;
      for (std::size_t i = 0; i < live.size(); ++i) {
        runnable[i] = tasks[live[i]].can_progress() ? 1 : 0;
        any |= runnable[i] != 0;
      }
      if (!any) throw deadlock_error(describe_wait_graph(tasks, live, base));

      const std::size_t chosen = scheduler_.pick(runnable);
      const std::size_t index = live[chosen];
      recorder_.set_current(base + static_cast<std::uint32_t>(index), tick_++);
      if (tasks[index].step(recorder_) == step_result::finished) live.erase(live.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
  }

  std::uint64_t ticks() const noexcept { return tick_; }
  Scheduler& scheduler() noexcept { return scheduler_; }

  /// The trace of everything run so far; resets the recorder.
  step_trace take_trace() { return recorder_.take(); }

 private:
  template <class Task>
  static std::string describe_wait_graph(std::span<Task> tasks, const std::vector<std::size_t>& live,
                                         std::uint32_t base) {
    std::ostringstream os;
    os << "deterministic executor: no runnable task; wait graph:";
    for (std::size_t i : live) {
      os << "\n  thread " << (base + i) << " at slot " << tasks[i].position();
      if constexpr (requires { tasks[i].awaited(); }) os << " waits on slot " << tasks[i].awaited();
      else os << " waits for a handoff";
    }
    return os.str();
  }

  Scheduler scheduler_;
  trace_recorder recorder_;
  std::uint64_t tick_ = 0;
};

deterministic_executor(std::uint64_t, bool) -> deterministic_executor<jitter_scheduler>;
deterministic_executor(std::uint64_t) -> deterministic_executor<jitter_scheduler>;

}  // namespace flatpq
