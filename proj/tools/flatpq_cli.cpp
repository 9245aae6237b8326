#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

#include "flatpq/harness/simulate.hpp"
#include "flatpq/harness/workload.hpp"

using namespace flatpq;
using namespace flatpq::harness;

namespace {

std::vector<impl_id> parse_impls(const std::vector<std::string>& names) {
  std::vector<impl_id> out;
  for (const auto& n : names) {
    if (n == "all") return {std::begin(all_impls), std::end(all_impls)};
    out.push_back(parse_impl(n));
  }
  return out;
}

std::vector<unsigned> default_threads() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<unsigned> t;
  for (unsigned p = 1; p < hw; p *= 2) t.push_back(p);
  t.push_back(hw);
  return t;
}

struct common_flags {
  std::vector<std::string> impls{"all"};
  std::vector<unsigned> threads = default_threads();
  double ratio = 0.5;
  std::uint64_t seed = 1;

  void add(CLI::App& app) {
    app.add_option("--impl", impls, "flat-parallel, fc-sequential, coarse-lock or all")->delimiter(',');
    app.add_option("--threads", threads, "thread counts")->delimiter(',');
    app.add_option("--ratio", ratio, "fraction of extractMin operations")->check(CLI::Range(0.0, 1.0));
    app.add_option("--seed", seed, "base seed")->envname("FLATPQ_SEED");
  }
};

int bench(const common_flags& common, std::vector<std::size_t> sizes, std::vector<key_type> ranges, double duration,
          double warmup, unsigned runs, std::optional<std::uint64_t> ops, bool full, const std::string& csv_path) {
  if (full) {
    sizes = {800'000, 8'000'000};
    ranges = {10'000, 2'147'483'647};
    duration = 10.0;
    warmup = 10.0;
    runs = 5;
  }
  std::ofstream file;
  if (!csv_path.empty()) {
    file.open(csv_path);
    if (!file) throw std::runtime_error("cannot open " + csv_path);
  }
  std::ostream& csv = csv_path.empty() ? std::cout : file;
  csv << csv_header << '\n';
  for (impl_id impl : parse_impls(common.impls))
    for (std::size_t size : sizes)
      for (key_type range : ranges)
        for (unsigned t : common.threads) {
          workload_config cfg;
          cfg.impl = impl;
          cfg.threads = t;
          cfg.initial_size = size;
          cfg.key_range = range;
          cfg.extract_ratio = common.ratio;
          cfg.duration_s = duration;
          cfg.warmup_s = warmup;
          cfg.runs = runs;
          cfg.seed = common.seed;
          cfg.ops_per_run = ops;
          const run_report r = run_bench(cfg);
          write_csv_rows(csv, r);
          csv.flush();
          std::cerr << to_string(impl) << " threads=" << t << " size=" << size << " range=" << range
                    << " mean_mops=" << r.mean_mops << " stddev=" << r.stddev_mops << '\n';
        }
  return 0;
}

int stress(const common_flags& common, std::size_t size, key_type range, std::uint64_t ops, bool fault) {
  bool ok = true;
  for (impl_id impl : parse_impls(common.impls))
    for (unsigned t : common.threads) {
      workload_config cfg;
      cfg.impl = impl;
      cfg.threads = t;
      cfg.initial_size = size;
      cfg.key_range = range;
      cfg.extract_ratio = common.ratio;
      cfg.seed = common.seed;
      cfg.ops_per_run = ops;
      const stress_report r = run_stress(cfg, fault);
      write_stress_report(std::cout, cfg, r);
      ok &= r.passed();
    }
  return ok ? 0 : 1;
}

int simulate(simulate_config cfg, const std::string& csv_path, const std::string& trace_path) {
  const simulate_report r = run_simulation(cfg);
  std::ofstream file;
  if (!csv_path.empty()) file.open(csv_path);
  write_simulation_table(csv_path.empty() ? std::cout : file, r);

  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out) throw std::runtime_error("cannot open " + trace_path);
    key_generator gen(cfg.seed);
    binary_heap h(cfg.sizes.front() + cfg.ks.front());
    for (std::size_t i = 0; i < cfg.sizes.front(); ++i) h.insert_classic(gen.uniform(1'000'000'000));
    deterministic_executor exec(cfg.seed);
    bulk_extract(h, cfg.ks.front(), {}, exec);
    std::vector<key_type> values(cfg.ks.front());
    for (auto& x : values) x = gen.uniform(1'000'000'000);
    bulk_insert(h, values, exec);
    write_trace(out, exec.take_trace());
  }

  const double c = cfg.bound_constant;
  const bool work = r.work_within(c), span = r.span_within(c), access = r.access_within(c);
  const auto deadlocks = r.total(&sim_cell::deadlocks);
  const auto waits = r.total(&sim_cell::wait_violations);
  const auto invalid = r.total(&sim_cell::invalid_heaps) + r.total(&sim_cell::invariant_violations);
  std::cerr << "work<=" << c << "k(log2 n+1): " << (work ? "yes" : "NO") << "  span<=" << c
            << "(k+log2 n): " << (span ? "yes" : "NO") << "  access<=" << c << "(P+log2 S): " << (access ? "yes" : "NO")
            << "  deadlocks=" << deadlocks << "  wait_violations=" << waits << "  invalid=" << invalid << '\n';
  return work && span && access && deadlocks == 0 && waits == 0 && invalid == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flat-combining parallel priority queue: benchmarks, stress checks and kernel simulation"};
  app.require_subcommand(1);

  common_flags bench_common;
  std::vector<std::size_t> sizes{100'000, 800'000};
  std::vector<key_type> ranges{10'000, 2'147'483'647};
  double duration = 1.0, warmup = 1.0;
  unsigned runs = 3;
  std::optional<std::uint64_t> bench_ops;
  bool full = false;
  std::string csv;
  auto* b = app.add_subcommand("bench", "timed throughput runs, CSV output");
  bench_common.add(*b);
  b->add_option("--size", sizes, "initial sizes")->delimiter(',');
  b->add_option("--range", ranges, "key range bounds")->delimiter(',');
  b->add_option("--duration-s", duration, "seconds per timed run")->check(CLI::PositiveNumber);
  b->add_option("--warmup-s", warmup, "untimed warmup seconds")->check(CLI::NonNegativeNumber);
  b->add_option("--runs", runs, "timed runs per configuration")->check(CLI::PositiveNumber);
  b->add_option("--ops", bench_ops, "fixed operations per run instead of a duration");
  b->add_flag("--full", full, "sizes 8e5,8e6; 5 runs of 10 s after 10 s warmup");
  b->add_option("--csv", csv, "CSV output path (default stdout)");

  common_flags stress_common;
  stress_common.threads = {2, 4, 8, 16};
  std::size_t stress_size = 10'000;
  key_type stress_range = 10'000;
  std::uint64_t stress_ops = 1'000'000;
  bool fault = false;
  auto* s = app.add_subcommand("stress", "ledger-checked conservation run");
  stress_common.add(*s);
  s->add_option("--size", stress_size, "initial size");
  s->add_option("--range", stress_range, "key range bound")->check(CLI::PositiveNumber);
  s->add_option("--ops", stress_ops, "total operations")->check(CLI::PositiveNumber);
  s->add_flag("--inject-fault", fault, "drop one acknowledged insert to exercise the checker");

  simulate_config sim;
  std::string sim_csv, trace;
  auto* m = app.add_subcommand("simulate", "work/span and access counts of the bulk kernels");
  m->add_option("--n", sim.sizes, "heap sizes")->delimiter(',');
  m->add_option("--k", sim.ks, "batch sizes")->delimiter(',');
  m->add_option("--seeds", sim.seeds, "seeds per cell")->check(CLI::PositiveNumber);
  m->add_option("--seed", sim.seed, "base seed")->envname("FLATPQ_SEED");
  m->add_option("--csv", sim_csv, "table output path (default stdout)");
  m->add_option("--trace", trace, "write the event trace of one extract and one insert batch");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*b) return bench(bench_common, sizes, ranges, duration, warmup, runs, bench_ops, full, csv);
    if (*s) return stress(stress_common, stress_size, stress_range, stress_ops, fault);
    return simulate(sim, sim_csv, trace);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
