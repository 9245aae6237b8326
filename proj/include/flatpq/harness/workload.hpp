#pragma once

// Timed throughput runs and ledger-checked stress runs over the three queue
// implementations.
//
// Each worker thread loops: with probability extract_ratio call extract_min,
// otherwise insert a key drawn uniformly from [0, key_range). Empty extract
// results count as completed operations. A config is prepopulated once,
// warmed up untimed, then measured for `runs` consecutive timed runs on the
// same queue. With ops_per_run set, each run executes exactly that many
// operations instead of running for duration_s.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "flatpq/queues.hpp"
#include "flatpq/random.hpp"

namespace flatpq::harness {

enum class impl_id { flat_parallel, fc_sequential, coarse_lock };

inline constexpr impl_id all_impls[] = {impl_id::flat_parallel, impl_id::fc_sequential, impl_id::coarse_lock};

inline std::string_view to_string(impl_id id) noexcept {
  switch (id) {
    case impl_id::flat_parallel: return flat_parallel_queue::name;
    case impl_id::fc_sequential: return fc_sequential_queue::name;
    case impl_id::coarse_lock: return coarse_lock_queue::name;
  }
  return "?";
}

inline impl_id parse_impl(std::string_view s) {
  for (impl_id id : all_impls)
    if (to_string(id) == s) return id;
  throw std::invalid_argument("unknown implementation '" + std::string(s) +
                              "' (expected flat-parallel, fc-sequential or coarse-lock)");
}

struct workload_config {
  impl_id impl = impl_id::flat_parallel;
  unsigned threads = 1;
  std::size_t initial_size = 100'000;
  key_type key_range = 10'000;
  double extract_ratio = 0.5;
  double duration_s = 1.0;
  double warmup_s = 1.0;
  unsigned runs = 3;
  std::uint64_t seed = 1;
  /// Fixed operation count per run; replaces the timed loop.
  std::optional<std::uint64_t> ops_per_run;
  /// Publication records available to worker threads.
  std::size_t registration_capacity = 256;

  void validate() const {
    if (threads < 1) throw std::invalid_argument("threads must be at least 1");
    if (threads > registration_capacity)
      throw std::invalid_argument("threads (" + std::to_string(threads) + ") exceed registration capacity " +
                                  std::to_string(registration_capacity));
    if (!(extract_ratio >= 0.0 && extract_ratio <= 1.0)) throw std::invalid_argument("ratio must be in [0, 1]");
    if (!ops_per_run && !(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
    if (!(warmup_s >= 0.0)) throw std::invalid_argument("warmup must not be negative");
    if (runs < 1) throw std::invalid_argument("runs must be at least 1");
    if (key_range < 1) throw std::invalid_argument("key range must be at least 1");
    if (ops_per_run && *ops_per_run == 0) throw std::invalid_argument("ops must be positive");
  }

  queue_options queue() const {
    queue_options o;
    o.initial_capacity = std::max<std::size_t>(initial_size * 2, 1024);
    o.max_threads = registration_capacity + 1;  // plus the prepopulating thread
    o.allow_overflow = false;
    return o;
  }
};

struct run_result {
  unsigned run = 0;
  std::uint64_t ops = 0;
  double mops = 0.0;
};

struct run_report {
  workload_config config;
  std::vector<run_result> runs;
  double mean_mops = 0.0;
  double stddev_mops = 0.0;
};

/// Calls f(queue) with a freshly constructed queue of the given kind.
template <class F>
decltype(auto) with_queue(impl_id id, const queue_options& opts, F&& f) {
  switch (id) {
    case impl_id::flat_parallel: {
      flat_parallel_queue q(opts);
      return f(q);
    }
    case impl_id::fc_sequential: {
      fc_sequential_queue q(opts);
      return f(q);
    }
    case impl_id::coarse_lock: break;
  }
  coarse_lock_queue q(opts);
  return f(q);
}

namespace detail {

/// Per-operation hooks for the worker loop; the defaults do nothing.
struct no_ledger {
  void inserted(unsigned, key_type) noexcept {}
  void extracted(unsigned, std::optional<key_type>) noexcept {}
};

inline std::uint64_t share(std::uint64_t total, unsigned threads, unsigned t) {
  return total / threads + (t < total % threads ? 1 : 0);
}

/// One phase of all threads. Either runs for `seconds` (budget empty) or
/// executes exactly `budget` operations split across threads.
template <concurrent_priority_queue Q, class Ledger>
std::uint64_t run_phase(Q& q, const workload_config& cfg, std::uint64_t stream, double seconds,
                        std::optional<std::uint64_t> budget, Ledger& ledger) {
  std::atomic<bool> go{false}, stop{false};
  std::atomic<unsigned> ready{0};
  std::vector<std::uint64_t> counts(cfg.threads, 0);
  {
    std::vector<std::jthread> pool;
    pool.reserve(cfg.threads);
    for (unsigned t = 0; t < cfg.threads; ++t) {
      pool.emplace_back([&, t] {
        auto h = q.attach();
        key_generator gen(derive_seed(cfg.seed, stream * 1'000'003 + t));
        const std::uint64_t limit = budget ? share(*budget, cfg.threads, t) : UINT64_MAX;
        ready.fetch_add(1, std::memory_order_release);
        while (!go.load(std::memory_order_acquire)) std::this_thread::yield();
        std::uint64_t n = 0;
        while (n < limit && !stop.load(std::memory_order_relaxed)) {
          if (gen.bernoulli(cfg.extract_ratio)) {
            ledger.extracted(t, h.extract_min());
          } else {
            const key_type x = gen.uniform(cfg.key_range);
            h.insert(x);
            ledger.inserted(t, x);
          }
          ++n;
        }
        counts[t] = n;
      });
    }
    while (ready.load(std::memory_order_acquire) < cfg.threads) std::this_thread::yield();
    go.store(true, std::memory_order_release);
    if (!budget) {
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
      stop.store(true, std::memory_order_relaxed);
    }
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

}  // namespace detail

inline void summarize(run_report& report) {
  const auto n = static_cast<double>(report.runs.size());
  double sum = 0.0;
  for (const auto& r : report.runs) sum += r.mops;
  report.mean_mops = n > 0 ? sum / n : 0.0;
  double sq = 0.0;
  for (const auto& r : report.runs) sq += (r.mops - report.mean_mops) * (r.mops - report.mean_mops);
  report.stddev_mops = n > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
}

inline run_report run_bench(const workload_config& cfg) {
  cfg.validate();
  return with_queue(cfg.impl, cfg.queue(), [&](auto& q) {
    run_report report;
    report.config = cfg;
    prepopulate(q, cfg.initial_size, cfg.key_range, cfg.seed);
    detail::no_ledger none;
    if (cfg.warmup_s > 0.0) detail::run_phase(q, cfg, 0, cfg.warmup_s, std::nullopt, none);
    for (unsigned r = 0; r < cfg.runs; ++r) {
      run_result rr;
      rr.run = r;
      if (cfg.ops_per_run) {
        const auto t0 = std::chrono::steady_clock::now();
        rr.ops = detail::run_phase(q, cfg, r + 1, 0.0, cfg.ops_per_run, none);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        rr.mops = static_cast<double>(rr.ops) / (std::max(dt.count(), 1e-9) * 1e6);
      } else {
        rr.ops = detail::run_phase(q, cfg, r + 1, cfg.duration_s, std::nullopt, none);
        rr.mops = static_cast<double>(rr.ops) / (cfg.duration_s * 1e6);
      }
      report.runs.push_back(rr);
    }
    summarize(report);
    return report;
  });
}

inline constexpr std::string_view csv_header = "impl,threads,init_size,key_range,ratio,run,ops,mops";

inline void write_csv_rows(std::ostream& os, const run_report& report) {
  const auto& c = report.config;
  char ratio[32], mops[32];
  std::snprintf(ratio, sizeof ratio, "%g", c.extract_ratio);
  for (const auto& r : report.runs) {
    std::snprintf(mops, sizeof mops, "%.6f", r.mops);
    os << to_string(c.impl) << ',' << c.threads << ',' << c.initial_size << ',' << c.key_range << ',' << ratio << ','
       << r.run << ',' << r.ops << ',' << mops << '\n';
  }
}

struct stress_report {
  std::uint64_t ops = 0;
  std::size_t inserted = 0;
  std::size_t extracted = 0;
  std::size_t empty_results = 0;
  std::size_t final_size = 0;
  /// Keys that were inserted but are neither extracted nor left in the heap.
  std::vector<key_type> missing;
  /// Keys observed more often than they were inserted.
  std::vector<key_type> unexpected;
  bool heap_valid = false;
  bool flags_clear = false;

  bool passed() const noexcept { return missing.empty() && unexpected.empty() && heap_valid && flags_clear; }
};

/// Wraps a queue so that one insert call, the `drop_at`-th overall, is
/// acknowledged without reaching the queue. Used to check that the stress
/// checker notices a lost key.
template <concurrent_priority_queue Q>
class dropping_queue {
 public:
  static constexpr std::string_view name = Q::name;

  dropping_queue(Q& inner, std::uint64_t drop_at) : inner_(&inner), drop_at_(drop_at) {}

  class handle {
   public:
    void insert(key_type x) {
      if (owner_->count_.fetch_add(1, std::memory_order_relaxed) == owner_->drop_at_) return;
      inner_.insert(x);
    }
    std::optional<key_type> extract_min() { return inner_.extract_min(); }

   private:
    friend class dropping_queue;
    handle(dropping_queue* owner, decltype(std::declval<Q&>().attach()) inner)
        : owner_(owner), inner_(std::move(inner)) {}
    dropping_queue* owner_;
    decltype(std::declval<Q&>().attach()) inner_;
  };

  handle attach() { return handle(this, inner_->attach()); }
  heap_snapshot quiesce() { return inner_->quiesce(); }

 private:
  Q* inner_;
  std::uint64_t drop_at_;
  std::atomic<std::uint64_t> count_{0};
};

namespace detail {

struct key_ledger {
  explicit key_ledger(unsigned threads) : ins(threads), ext(threads), empties(threads, 0) {}
  void inserted(unsigned t, key_type x) { ins[t].push_back(x); }
  void extracted(unsigned t, std::optional<key_type> x) {
    if (x) ext[t].push_back(*x);
    else ++empties[t];
  }
  std::vector<std::vector<key_type>> ins, ext;
  std::vector<std::size_t> empties;
};

template <concurrent_priority_queue Q>
stress_report stress_on(Q& q, const workload_config& cfg, std::vector<key_type> expected) {
  detail::key_ledger ledger(cfg.threads);
  stress_report rep;
  rep.ops = detail::run_phase(q, cfg, 1, 0.0, cfg.ops_per_run.value_or(1'000'000), ledger);
  const heap_snapshot snap = q.quiesce();
  rep.heap_valid = snap.heap_valid;
  rep.flags_clear = snap.flags_clear;
  rep.final_size = snap.values.size();

  std::vector<key_type> observed = snap.values;
  for (unsigned t = 0; t < cfg.threads; ++t) {
    rep.inserted += ledger.ins[t].size();
    rep.extracted += ledger.ext[t].size();
    rep.empty_results += ledger.empties[t];
    expected.insert(expected.end(), ledger.ins[t].begin(), ledger.ins[t].end());
    observed.insert(observed.end(), ledger.ext[t].begin(), ledger.ext[t].end());
  }
  std::sort(expected.begin(), expected.end());
  std::sort(observed.begin(), observed.end());
  std::set_difference(expected.begin(), expected.end(), observed.begin(), observed.end(),
                      std::back_inserter(rep.missing));
  std::set_difference(observed.begin(), observed.end(), expected.begin(), expected.end(),
                      std::back_inserter(rep.unexpected));
  return rep;
}

}  // namespace detail

/// Runs ops_per_run operations (default 10^6) with a per-thread key ledger
/// and checks conservation, heap validity and flag hygiene at quiescence.
/// inject_fault drops one acknowledged insert.
inline stress_report run_stress(const workload_config& cfg, bool inject_fault = false) {
  cfg.validate();
  return with_queue(cfg.impl, cfg.queue(), [&](auto& q) {
    std::vector<key_type> initial = prepopulate(q, cfg.initial_size, cfg.key_range, cfg.seed);
    if (!inject_fault) return detail::stress_on(q, cfg, std::move(initial));
    dropping_queue faulty(q, 0);
    return detail::stress_on(faulty, cfg, std::move(initial));
  });
}

inline void write_stress_report(std::ostream& os, const workload_config& cfg, const stress_report& r) {
  os << to_string(cfg.impl) << " threads=" << cfg.threads << " ops=" << r.ops << " inserted=" << r.inserted
     << " extracted=" << r.extracted << " empty=" << r.empty_results << " final_size=" << r.final_size
     << " heap_valid=" << (r.heap_valid ? "yes" : "no") << " flags_clear=" << (r.flags_clear ? "yes" : "no") << '\n';
  auto dump = [&](const char* label, const std::vector<key_type>& keys) {
    if (keys.empty()) return;
    os << "  " << label << " (" << keys.size() << "):";
    for (std::size_t i = 0; i < std::min<std::size_t>(keys.size(), 20); ++i) os << ' ' << keys[i];
    if (keys.size() > 20) os << " ...";
    os << '\n';
  };
  dump("missing", r.missing);
  dump("unexpected", r.unexpected);
  os << (r.passed() ? "PASS" : "FAIL") << '\n';
}

}  // namespace flatpq::harness
