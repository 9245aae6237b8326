#pragma once

// Work/span simulation of the bulk kernels under the deterministic executor,
// plus shared-location accounting for whole combining rounds.
//
// For every (n, k, seed): a random heap of n keys, one k-way extract trace
// and one k-way insert trace, and one round of P = k requests (all extracts,
// all inserts, or mixed, by seed). Bounds checked per trace:
//
//   work  <= c * k * (log2 n + 1)
//   span  <= c * (k + log2 n)
//   accesses per request <= c * (P + log2 S)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include "flatpq/bulk_extract.hpp"
#include "flatpq/bulk_insert.hpp"
#include "flatpq/executor.hpp"
#include "flatpq/heap.hpp"
#include "flatpq/random.hpp"
#include "flatpq/round.hpp"

namespace flatpq::harness {

struct simulate_config {
  std::vector<std::size_t> sizes{1u << 10, 1u << 15, 1u << 20};
  std::vector<std::size_t> ks{1, 2, 4, 8, 16, 32, 64};
  unsigned seeds = 100;
  std::uint64_t seed = 1;
  double bound_constant = 4.0;
};

struct trace_stats {
  std::uint64_t max_work = 0;
  std::uint64_t max_span = 0;
  double sum_work = 0;
  double sum_span = 0;
  /// max work / (k (log2 n + 1)) and max span / (k + log2 n)
  double work_ratio = 0;
  double span_ratio = 0;
  bool span_equals_work = true;

  void add(const step_trace& t, std::size_t n, std::size_t k) {
    const double lg = std::log2(static_cast<double>(n));
    max_work = std::max(max_work, t.work);
    max_span = std::max(max_span, t.span);
    sum_work += static_cast<double>(t.work);
    sum_span += static_cast<double>(t.span);
    work_ratio = std::max(work_ratio, static_cast<double>(t.work) / (static_cast<double>(k) * (lg + 1)));
    span_ratio = std::max(span_ratio, static_cast<double>(t.span) / (static_cast<double>(k) + lg));
    span_equals_work &= t.span == t.work;
  }
};

struct sim_cell {
  std::size_t n = 0;
  std::size_t k = 0;
  unsigned runs = 0;
  trace_stats extract;
  trace_stats insert;
  std::uint64_t wait_violations = 0;
  std::uint64_t invariant_violations = 0;
  std::uint64_t deadlocks = 0;
  std::uint64_t invalid_heaps = 0;
  std::size_t max_access = 0;
  /// max accesses / (P + log2 S)
  double access_ratio = 0;
};

struct simulate_report {
  simulate_config config;
  std::vector<sim_cell> cells;

  bool work_within(double c) const {
    return std::all_of(cells.begin(), cells.end(), [c](const sim_cell& s) {
      return s.extract.work_ratio <= c && s.insert.work_ratio <= c;
    });
  }
  bool span_within(double c) const {
    return std::all_of(cells.begin(), cells.end(), [c](const sim_cell& s) {
      return s.extract.span_ratio <= c && s.insert.span_ratio <= c;
    });
  }
  bool access_within(double c) const {
    return std::all_of(cells.begin(), cells.end(), [c](const sim_cell& s) { return s.access_ratio <= c; });
  }
  std::uint64_t total(std::uint64_t sim_cell::*field) const {
    std::uint64_t t = 0;
    for (const auto& s : cells) t += s.*field;
    return t;
  }
};

/// Distinct shared locations each request of one combining round touches,
/// following the combiner's task assignment: the leader (request 0) scans
/// every record, plans the round and runs task 0 of each phase; the i-th
/// other requester of a phase runs task i. `is_extract[i]` gives the kind of
/// request i, `insert_values[i]` the key of insert requests.
struct round_accounting {
  std::vector<std::size_t> per_request;
  std::vector<step_trace> traces;  // extract phase, insert phase
};

inline round_accounting account_round(binary_heap& heap, const std::vector<bool>& is_extract,
                                      const std::vector<key_type>& insert_values, std::uint64_t seed) {
  const std::size_t p = is_extract.size();
  std::vector<std::set<std::uint64_t>> touched(p);
  for (std::size_t i = 0; i < p; ++i) {
    touched[0].insert(location::publication(i));
    touched[i].insert(location::publication(i));
  }

  std::vector<std::size_t> extracts, inserts;
  for (std::size_t i = 0; i < p; ++i) (is_extract[i] ? extracts : inserts).push_back(i);
  std::stable_sort(inserts.begin(), inserts.end(),
                   [&](std::size_t a, std::size_t b) { return insert_values[a] < insert_values[b]; });
  std::vector<key_type> sorted_values;
  for (std::size_t i : inserts) sorted_values.push_back(insert_values[i]);

  extract_batch xb;
  batch_plan plan = plan_round(heap, extracts.size(), sorted_values, xb);
  for (slot_index s : xb.plan().examined) touched[0].insert(location::slot(s));
  for (const auto& e : plan.splits.entries()) touched[0].insert(location::slot(e.slot));

  round_accounting out;
  auto charge = [&](const step_trace& t, const std::vector<std::size_t>& requesters, std::size_t tasks) {
    std::vector<std::size_t> workers;
    for (std::size_t r : requesters)
      if (r != 0) workers.push_back(r);
    const std::size_t assigned = tasks == 0 ? 0 : std::min(workers.size(), tasks - 1);
    for (std::size_t task = 0; task < tasks; ++task) {
      const std::size_t who = task >= 1 && task <= assigned ? workers[task - 1] : 0;
      touched[who].insert(t.touched[task].begin(), t.touched[task].end());
    }
  };

  deterministic_executor exec(seed);
  exec.run(xb.tasks());
  out.traces.push_back(exec.take_trace());
  charge(out.traces.back(), extracts, xb.tasks().size());

  if (!plan.remaining_inserts.empty()) {
    std::vector<std::size_t> remaining(inserts.begin() + static_cast<std::ptrdiff_t>(plan.eliminated), inserts.end());
    insert_batch ib;
    ib.prepare(heap, plan.remaining_inserts, std::move(plan.splits));
    exec.run(ib.tasks());
    out.traces.push_back(exec.take_trace());
    charge(out.traces.back(), remaining, ib.tasks().size());
  } else {
    out.traces.emplace_back();
  }
  for (const auto& s : touched) out.per_request.push_back(s.size());
  return out;
}

inline sim_cell simulate_cell(std::size_t n, std::size_t k, unsigned seeds, std::uint64_t base_seed) {
  sim_cell cell;
  cell.n = n;
  cell.k = k;
  for (unsigned s = 0; s < seeds; ++s) {
    const std::uint64_t seed = derive_seed(base_seed, (static_cast<std::uint64_t>(n) << 32) ^ (k << 16) ^ s);
    key_generator gen(seed);
    binary_heap base(n + k);
    for (std::size_t i = 0; i < n; ++i) base.insert_classic(gen.uniform(1'000'000'000));
    ++cell.runs;

    auto note = [&](const step_trace& t, const binary_heap& h) {
      cell.wait_violations += wait_direction_violations(t.events);
      cell.invariant_violations += t.invariant_violations;
      cell.invalid_heaps += h.is_valid() ? 0 : 1;
    };

    try {
      binary_heap h = base;
      deterministic_executor exec(gen.next());
      bulk_extract(h, std::min(k, n), {}, exec);
      const auto t = exec.take_trace();
      cell.extract.add(t, n, k);
      note(t, h);
    } catch (const deadlock_error&) {
      ++cell.deadlocks;
    }

    try {
      binary_heap h = base;
      std::vector<key_type> values(k);
      for (auto& x : values) x = gen.uniform(1'000'000'000);
      deterministic_executor exec(gen.next());
      bulk_insert(h, values, exec);
      const auto t = exec.take_trace();
      cell.insert.add(t, n, k);
      note(t, h);
    } catch (const deadlock_error&) {
      ++cell.deadlocks;
    }

    try {
      binary_heap h = base;
      std::vector<bool> kinds(k);
      std::vector<key_type> values(k);
      for (std::size_t i = 0; i < k; ++i) {
        kinds[i] = s % 3 == 0 ? true : s % 3 == 1 ? false : gen.bernoulli(0.5);
        values[i] = gen.uniform(1'000'000'000);
      }
      const auto acc = account_round(h, kinds, values, gen.next());
      for (const auto& t : acc.traces) note(t, h);
      const std::size_t worst = *std::max_element(acc.per_request.begin(), acc.per_request.end());
      cell.max_access = std::max(cell.max_access, worst);
      cell.access_ratio = std::max(cell.access_ratio, static_cast<double>(worst) /
                                                          (static_cast<double>(k) + std::log2(static_cast<double>(n))));
    } catch (const deadlock_error&) {
      ++cell.deadlocks;
    }
  }
  return cell;
}

inline simulate_report run_simulation(const simulate_config& cfg) {
  simulate_report report;
  report.config = cfg;
  for (std::size_t n : cfg.sizes)
    for (std::size_t k : cfg.ks) {
      if (k > n || k == 0 || n == 0) throw std::invalid_argument("simulate requires n >= k >= 1");
      report.cells.push_back(simulate_cell(n, k, cfg.seeds, cfg.seed));
    }
  return report;
}

inline void write_simulation_table(std::ostream& os, const simulate_report& r) {
  os << "n,k,runs,extract_max_work,extract_mean_work,extract_max_span,extract_mean_span,extract_work_c,extract_span_c,"
        "insert_max_work,insert_mean_work,insert_max_span,insert_mean_span,insert_work_c,insert_span_c,"
        "max_access,access_c,wait_violations,deadlocks\n";
  char buf[512];
  for (const auto& c : r.cells) {
    const double runs = c.runs ? c.runs : 1;
    std::snprintf(buf, sizeof buf,
                  "%zu,%zu,%u,%llu,%.2f,%llu,%.2f,%.3f,%.3f,%llu,%.2f,%llu,%.2f,%.3f,%.3f,%zu,%.3f,%llu,%llu\n", c.n,
                  c.k, c.runs, static_cast<unsigned long long>(c.extract.max_work), c.extract.sum_work / runs,
                  static_cast<unsigned long long>(c.extract.max_span), c.extract.sum_span / runs,
                  c.extract.work_ratio, c.extract.span_ratio, static_cast<unsigned long long>(c.insert.max_work),
                  c.insert.sum_work / runs, static_cast<unsigned long long>(c.insert.max_span),
                  c.insert.sum_span / runs, c.insert.work_ratio, c.insert.span_ratio, c.max_access, c.access_ratio,
                  static_cast<unsigned long long>(c.wait_violations), static_cast<unsigned long long>(c.deadlocks));
    os << buf;
  }
}

}  // namespace flatpq::harness
