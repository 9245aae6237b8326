#pragma once

// Event traces of bulk operations run under the deterministic executor, and
// the recorder that derives work and span from them.
//
// Work counts slot visits. Span is the longest chain of visits where a visit
// depends on the previous visit of its own virtual thread, on the last write
// to any slot it reads, and (for a helper's first visit) on the handoff that
// released it. Waiting costs nothing by itself.

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flatpq/heap.hpp"

namespace flatpq {

enum class event_kind : std::uint8_t { visit, wait_locked, wait_handoff, send, receive };

inline std::string_view to_string(event_kind k) noexcept {
  switch (k) {
    case event_kind::visit: return "visit";
    case event_kind::wait_locked: return "wait-locked";
    case event_kind::wait_handoff: return "wait-handoff";
    case event_kind::send: return "send";
    case event_kind::receive: return "receive";
  }
  return "?";
}

inline event_kind parse_event_kind(std::string_view s) {
  for (auto k : {event_kind::visit, event_kind::wait_locked, event_kind::wait_handoff, event_kind::send,
                 event_kind::receive})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown trace event kind '" + std::string(s) + "'");
}

struct trace_event {
  std::uint32_t thread = 0;
  std::uint64_t step = 0;
  event_kind kind = event_kind::visit;
  slot_index slot = 0;
  /// The awaited slot for wait-locked events, otherwise equal to slot.
  slot_index target = 0;

  friend bool operator==(const trace_event&, const trace_event&) = default;
};

/// Identifiers of shared locations other than heap slots.
namespace location {
inline constexpr std::uint64_t mailbox_tag = std::uint64_t{1} << 63;
inline constexpr std::uint64_t publication_tag = std::uint64_t{1} << 62;
constexpr std::uint64_t slot(slot_index v) noexcept { return v; }
constexpr std::uint64_t mailbox(slot_index v) noexcept { return v | mailbox_tag; }
constexpr std::uint64_t publication(std::size_t i) noexcept { return i | publication_tag; }
}  // namespace location

struct step_trace {
  std::size_t threads = 0;
  std::vector<trace_event> events;
  std::uint64_t work = 0;
  std::uint64_t span = 0;
  std::uint64_t invariant_violations = 0;
  /// Distinct shared locations touched per virtual thread, sorted.
  std::vector<std::vector<std::uint64_t>> touched;

  friend bool operator==(const step_trace&, const step_trace&) = default;
};

constexpr bool is_strict_descendant(slot_index descendant, slot_index ancestor) noexcept {
  if (descendant <= ancestor || ancestor == 0) return false;
  return (descendant >> (slot_depth(descendant) - slot_depth(ancestor))) == ancestor;
}

/// Wait-on-locked events whose awaited slot is not strictly below the waiter.
inline std::size_t wait_direction_violations(std::span<const trace_event> events) noexcept {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const trace_event& e) {
    return e.kind == event_kind::wait_locked && !is_strict_descendant(e.target, e.slot);
  }));
}

/// Line format: `thread step kind slot [target]`; target is present for
/// wait-locked only. Lines starting with '#' are comments.
inline void write_trace(std::ostream& os, const step_trace& trace) {
  os << "# threads=" << trace.threads << " work=" << trace.work << " span=" << trace.span << '\n';
  for (const auto& e : trace.events) {
    os << e.thread << ' ' << e.step << ' ' << to_string(e.kind) << ' ' << e.slot;
    if (e.kind == event_kind::wait_locked) os << ' ' << e.target;
    os << '\n';
  }
}

inline std::vector<trace_event> read_trace_events(std::istream& is) {
  std::vector<trace_event> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    trace_event e;
    std::string kind;
    if (!(fields >> e.thread >> e.step >> kind >> e.slot))
      throw std::invalid_argument("malformed trace line " + std::to_string(lineno));
    e.kind = parse_event_kind(kind);
    e.target = e.slot;
    if (e.kind == event_kind::wait_locked && !(fields >> e.target))
      throw std::invalid_argument("wait-locked without target on line " + std::to_string(lineno));
    out.push_back(e);
  }
  return out;
}

/// Recorder used on real threads: every hook compiles away.
struct null_recorder {
  static constexpr bool enabled = false;
};

class trace_recorder {
 public:
  static constexpr bool enabled = true;

  explicit trace_recorder(bool keep_events = true) : keep_events_(keep_events) {}

  /// Starts a phase of n virtual threads that may only begin once everything
  /// recorded so far has finished. Returns the first thread id of the phase.
  std::uint32_t begin_phase(std::size_t n) {
    const auto base = static_cast<std::uint32_t>(thread_time_.size());
    thread_time_.resize(thread_time_.size() + n, span_);
    touched_.resize(touched_.size() + n);
    return base;
  }

  void set_current(std::uint32_t thread, std::uint64_t step) noexcept {
    current_ = thread;
    step_ = step;
  }

  void visit(slot_index at, std::span<const slot_index> reads, std::span<const slot_index> writes) {
    std::uint64_t start = thread_time_[current_];
    for (slot_index r : reads) {
      start = std::max(start, slot_time(r));
      touch(location::slot(r));
    }
    const std::uint64_t finish = start + 1;
    for (slot_index w : writes) {
      slot_time_[w] = finish;
      touch(location::slot(w));
    }
    thread_time_[current_] = finish;
    span_ = std::max(span_, finish);
    ++work_;
    push(event_kind::visit, at, at);
  }

  void wait_locked(slot_index at, slot_index awaited) { push(event_kind::wait_locked, at, awaited); }
  void wait_handoff(slot_index station) { push(event_kind::wait_handoff, station, station); }

  void send(slot_index station) {
    mailbox_time_[station] = thread_time_[current_];
    touch(location::mailbox(station));
    push(event_kind::send, station, station);
  }

  void receive(slot_index station) {
    auto it = mailbox_time_.find(station);
    if (it != mailbox_time_.end()) thread_time_[current_] = std::max(thread_time_[current_], it->second);
    touch(location::mailbox(station));
    push(event_kind::receive, station, station);
  }

  void violation() noexcept { ++violations_; }

  std::uint64_t work() const noexcept { return work_; }
  std::uint64_t span() const noexcept { return span_; }

  step_trace take() {
    step_trace t;
    t.threads = thread_time_.size();
    t.events = std::move(events_);
    t.work = work_;
    t.span = span_;
    t.invariant_violations = violations_;
    t.touched = std::move(touched_);
    for (auto& s : t.touched) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    *this = trace_recorder(keep_events_);
    return t;
  }

 private:
  std::uint64_t slot_time(slot_index v) const {
    auto it = slot_time_.find(v);
    return it == slot_time_.end() ? 0 : it->second;
  }

  void touch(std::uint64_t loc) { touched_[current_].push_back(loc); }

  void push(event_kind kind, slot_index slot, slot_index target) {
    if (keep_events_) events_.push_back({current_, step_, kind, slot, target});
  }

  bool keep_events_ = true;
  std::vector<trace_event> events_;
  std::vector<std::uint64_t> thread_time_;
  std::vector<std::vector<std::uint64_t>> touched_;
  std::unordered_map<slot_index, std::uint64_t> slot_time_;
  std::unordered_map<slot_index, std::uint64_t> mailbox_time_;
  std::uint64_t work_ = 0;
  std::uint64_t span_ = 0;
  std::uint64_t violations_ = 0;
  std::uint32_t current_ = 0;
  std::uint64_t step_ = 0;
};

}  // namespace flatpq
