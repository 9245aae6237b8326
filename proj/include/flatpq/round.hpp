#pragma once

// One combining round over a batch of E extractMin and I insert requests.
// Extracts are served first from the E' = min(E, size) smallest values; the
// m = min(E', I) smallest inserted values are eliminated straight into the
// extracted slots, and the remaining I - m inserts form a bulk insert.

#include <algorithm>
#include <cassert>
#include <optional>
#include <span>
#include <vector>

#include "flatpq/bulk_extract.hpp"
#include "flatpq/bulk_insert.hpp"
#include "flatpq/heap.hpp"
#include "flatpq/split_map.hpp"

namespace flatpq {

struct batch_plan {
  std::size_t extract_count = 0;
  std::size_t successful_extracts = 0;
  std::size_t eliminated = 0;
  /// Result of each extract request in drain order; nullopt past the heap's
  /// content.
  std::vector<std::optional<key_type>> extract_results;
  /// Inserts left for the bulk insert, ascending.
  std::vector<key_type> remaining_inserts;
  /// Split nodes for remaining_inserts over the post-extract size. Empty map
  /// when there is nothing left to insert.
  split_map splits;
  std::size_t final_size = 0;
};

/// Plans the round and runs the extract planning step (victims picked,
/// slots locked and refilled). `sorted_inserts` must be ascending.
inline batch_plan plan_round(binary_heap& heap, std::size_t extract_count, std::span<const key_type> sorted_inserts,
                             extract_batch& extracts) {
  assert(std::is_sorted(sorted_inserts.begin(), sorted_inserts.end()));
  batch_plan plan;
  const std::size_t size = heap.size();
  plan.extract_count = extract_count;
  plan.successful_extracts = std::min(extract_count, size);
  plan.eliminated = std::min(plan.successful_extracts, sorted_inserts.size());
  plan.final_size = size - plan.successful_extracts + sorted_inserts.size();

  // Growth reallocates the flag words, so it has to happen before any lock.
  heap.reserve(plan.final_size);

  const auto replacements = sorted_inserts.first(plan.eliminated);
  extracts.prepare(heap, plan.successful_extracts, replacements);

  plan.extract_results.assign(extract_count, std::nullopt);
  const auto& victims = extracts.plan().victims;
  for (std::size_t i = 0; i < victims.size(); ++i) plan.extract_results[i] = victims[i].value;

  const auto rest = sorted_inserts.subspan(plan.eliminated);
  plan.remaining_inserts.assign(rest.begin(), rest.end());
  if (!rest.empty()) plan.splits = compute_split_nodes(heap.size(), rest.size());
  return plan;
}

/// Full round on an arbitrary executor: extract phase, then insert phase.
template <class Executor>
std::vector<std::optional<key_type>> execute_round(binary_heap& heap, std::size_t extract_count,
                                                   std::span<const key_type> sorted_inserts, Executor& exec) {
  extract_batch extracts;
  batch_plan plan = plan_round(heap, extract_count, sorted_inserts, extracts);
  exec.run(extracts.tasks());
  if (!plan.remaining_inserts.empty()) {
    insert_batch inserts;
    inserts.prepare(heap, plan.remaining_inserts, std::move(plan.splits));
    exec.run(inserts.tasks());
  }
  return std::move(plan.extract_results);
}

}  // namespace flatpq
