#pragma once

// Flat-combining plumbing: per-thread request records, the publication list
// the combiner scans, and the combiner lock.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <algorithm>
#include <memory>
#include <vector>

#include "flatpq/executor.hpp"
#include "flatpq/heap.hpp"

namespace flatpq {

enum class request_kind : std::uint8_t { extract_min, insert };

/// idle is the resting state of a record between operations.
enum class request_status : std::uint8_t { idle, pushed, sift, finished };

/// Work the combiner hands to a waiting owner: run `task` to completion, then
/// count down `pending`.
struct task_assignment {
  void* task = nullptr;
  void (*run)(void*) = nullptr;
  std::atomic<std::size_t>* pending = nullptr;

  template <class Task>
  static task_assignment of(Task& t, std::atomic<std::size_t>& pending) {
    return {&t, [](void* p) { run_to_completion(*static_cast<Task*>(p)); }, &pending};
  }
};

struct alignas(64) request_slot {
  std::atomic<request_status> status{request_status::idle};
  request_kind kind = request_kind::insert;
  /// Insert argument, or the extract result when has_result is set.
  key_type value = 0;
  bool has_result = false;
  task_assignment assignment;
  std::size_t owner = 0;

  std::atomic<bool> in_use{false};
  request_slot* next = nullptr;
};

/// Writes the request and makes it visible to the next combiner scan.
inline void publish_request(request_slot& slot, request_kind kind, key_type value) noexcept {
  slot.kind = kind;
  slot.value = value;
  slot.has_result = false;
  slot.assignment = {};
  slot.status.store(request_status::pushed, std::memory_order_release);
}

/// A fixed array of records, one per registered thread, scanned in order by
/// the combiner. Threads beyond the fixed capacity get records from an
/// append-only overflow chain (records are recycled, never unlinked).
class publication_list {
 public:
  explicit publication_list(std::size_t fixed_slots, bool allow_overflow = true)
      : fixed_(std::make_unique<request_slot[]>(fixed_slots)), fixed_count_(fixed_slots), allow_overflow_(allow_overflow) {}

  publication_list(const publication_list&) = delete;
  publication_list& operator=(const publication_list&) = delete;

  ~publication_list() {
    request_slot* p = overflow_.load(std::memory_order_acquire);
    while (p) {
      request_slot* next = p->next;
      delete p;
      p = next;
    }
  }

  /// nullptr when every record is taken and overflow is disabled.
  request_slot* register_thread() {
    for (std::size_t i = 0; i < fixed_count_; ++i)
      if (claim(fixed_[i])) return &fixed_[i];
    if (!allow_overflow_) return nullptr;
    for (request_slot* p = overflow_.load(std::memory_order_acquire); p; p = p->next)
      if (claim(*p)) return p;
    auto* fresh = new request_slot;
    fresh->in_use.store(true, std::memory_order_relaxed);
    fresh->owner = next_owner_.fetch_add(1, std::memory_order_relaxed);
    request_slot* head = overflow_.load(std::memory_order_relaxed);
    do {
      fresh->next = head;
    } while (!overflow_.compare_exchange_weak(head, fresh, std::memory_order_release, std::memory_order_relaxed));
    return fresh;
  }

  void deregister(request_slot* slot) noexcept {
    slot->status.store(request_status::idle, std::memory_order_relaxed);
    slot->in_use.store(false, std::memory_order_release);
  }

  /// Calls f on every record whose status is pushed. Returns the number of
  /// records scanned.
  template <class F>
  std::size_t drain(F&& f) {
    std::size_t scanned = 0;
    auto visit = [&](request_slot& s) {
      ++scanned;
      if (s.status.load(std::memory_order_acquire) == request_status::pushed) f(s);
    };
    for (std::size_t i = 0; i < fixed_count_; ++i) visit(fixed_[i]);
    for (request_slot* p = overflow_.load(std::memory_order_acquire); p; p = p->next) visit(*p);
    return scanned;
  }

  std::size_t fixed_capacity() const noexcept { return fixed_count_; }

 private:
  bool claim(request_slot& s) {
    bool expected = false;
    if (!s.in_use.compare_exchange_strong(expected, true, std::memory_order_acq_rel)) return false;
    s.owner = next_owner_.fetch_add(1, std::memory_order_relaxed);
    s.status.store(request_status::idle, std::memory_order_relaxed);
    return true;
  }

  std::unique_ptr<request_slot[]> fixed_;
  std::size_t fixed_count_;
  bool allow_overflow_;
  std::atomic<request_slot*> overflow_{nullptr};
  std::atomic<std::size_t> next_owner_{0};
};

/// Drains every pending request, partitioned by kind. Extracts stay in drain
/// order; inserts are sorted by (value, owner). Returns the records scanned.
inline std::size_t collect_and_sort(publication_list& list, std::vector<request_slot*>& extracts,
                                    std::vector<request_slot*>& inserts) {
  extracts.clear();
  inserts.clear();
  const std::size_t scanned = list.drain(
      [&](request_slot& r) { (r.kind == request_kind::extract_min ? extracts : inserts).push_back(&r); });
  std::sort(inserts.begin(), inserts.end(), [](const request_slot* a, const request_slot* b) {
    return a->value != b->value ? a->value < b->value : a->owner < b->owner;
  });
  return scanned;
}

class combiner_lock {
 public:
  bool try_acquire() noexcept {
    return !held_.load(std::memory_order_relaxed) && !held_.exchange(true, std::memory_order_acquire);
  }
  void release() noexcept { held_.store(false, std::memory_order_release); }
  bool is_held() const noexcept { return held_.load(std::memory_order_relaxed); }

 private:
  std::atomic<bool> held_{false};
};

}  // namespace flatpq
