#include <gtest/gtest.h>

#include <bit>
#include <sstream>

#include "flatpq/bulk_extract.hpp"
#include "flatpq/bulk_insert.hpp"
#include "flatpq/executor.hpp"
#include "test_support.hpp"

using namespace flatpq;
using namespace flatpq::testing;

static step_trace extract_trace(std::size_t n, std::size_t k, std::uint64_t seed) {
  auto h = random_heap(n, seed);
  deterministic_executor exec(seed);
  bulk_extract(h, k, {}, exec);
  return exec.take_trace();
}

TEST(DeterministicExecutor, SameSeedSameTrace) {
  const auto a = extract_trace(1000, 16, 5);
  const auto b = extract_trace(1000, 16, 5);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.events.empty());
}

TEST(DeterministicExecutor, SingleSiftWorkBoundedByDepth) {
  for (std::size_t n : {1u, 2u, 7u, 100u, 4096u}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto t = extract_trace(n, 1, seed);
      const auto depth = static_cast<std::uint64_t>(std::bit_width(n));  // floor(log2 n) + 1
      ASSERT_LE(t.work, depth);
      ASSERT_EQ(t.span, t.work);
    }
  }
}

TEST(DeterministicExecutor, SingleInsertSpanEqualsPath) {
  for (std::size_t n : {0u, 1u, 6u, 1023u}) {
    auto h = random_heap(n, n);
    deterministic_executor exec(std::uint64_t{3});
    const key_type x[] = {42};
    bulk_insert(h, x, exec);
    const auto t = exec.take_trace();
    EXPECT_EQ(t.work, static_cast<std::uint64_t>(std::bit_width(n + 1)));
    EXPECT_EQ(t.span, t.work);
  }
}

TEST(DeterministicExecutor, PhasesChainTheirSpans) {
  auto h = random_heap(1000, 1);
  deterministic_executor exec(std::uint64_t{1});
  bulk_extract(h, 1, {}, exec);
  const key_type x[] = {5};
  bulk_insert(h, x, exec);
  const auto t = exec.take_trace();
  EXPECT_EQ(t.span, t.work);
  EXPECT_EQ(t.threads, 2u);
}

TEST(DeterministicExecutor, HelperWaitsForHandoff) {
  auto h = random_heap(64, 2);
  const key_type values[] = {1, 2, 3, 4};
  insert_batch batch;
  batch.prepare(h, values);
  // Helpers first: they can not run until the root traversal reaches them.
  auto tasks = batch.tasks();
  for (std::size_t i = 1; i < tasks.size(); ++i) EXPECT_FALSE(tasks[i].can_progress());
  deterministic_executor exec{scripted_scheduler{}};
  exec.run(tasks);
  const auto t = exec.take_trace();
  std::size_t sends = 0, receives = 0;
  for (const auto& e : t.events) {
    sends += e.kind == event_kind::send;
    receives += e.kind == event_kind::receive;
  }
  EXPECT_EQ(sends, 3u);
  EXPECT_EQ(receives, 3u);
  EXPECT_TRUE(h.is_valid());
}

TEST(DeterministicExecutor, ReportsDeadlock) {
  auto h = heap_layout({9, 2, 3, 4, 5});
  h.flags(1).store(node_flag::locked);
  h.flags(2).store(node_flag::locked);  // owned by nobody
  std::vector<sift_task> tasks{sift_task(h, 1)};
  deterministic_executor exec(std::uint64_t{0});
  try {
    exec.run(std::span(tasks));
    FAIL() << "expected deadlock";
  } catch (const deadlock_error& e) {
    EXPECT_NE(std::string(e.what()).find("waits on slot 2"), std::string::npos);
  }
}

TEST(DeterministicExecutor, WaitsPointDownward) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto t = extract_trace(300, 32, seed);
    ASSERT_EQ(wait_direction_violations(t.events), 0u);
  }
  const trace_event up{0, 0, event_kind::wait_locked, 4, 2};
  const trace_event sideways{0, 1, event_kind::wait_locked, 4, 5};
  const trace_event down{0, 2, event_kind::wait_locked, 2, 9};
  const std::vector<trace_event> events{up, sideways, down};
  EXPECT_EQ(wait_direction_violations(events), 2u);
}

TEST(StepTrace, TextRoundTrip) {
  const auto t = extract_trace(200, 8, 3);
  std::stringstream ss;
  write_trace(ss, t);
  EXPECT_EQ(read_trace_events(ss), t.events);
}

TEST(StepTrace, MalformedInput) {
  std::stringstream bad("0 1 visit\n");
  EXPECT_THROW(read_trace_events(bad), std::invalid_argument);
  std::stringstream kind("0 1 jump 3\n");
  EXPECT_THROW(read_trace_events(kind), std::invalid_argument);
  std::stringstream wait("0 1 wait-locked 3\n");
  EXPECT_THROW(read_trace_events(wait), std::invalid_argument);
}

TEST(StepTrace, Descendants) {
  EXPECT_TRUE(is_strict_descendant(4, 2));
  EXPECT_TRUE(is_strict_descendant(11, 1));
  EXPECT_FALSE(is_strict_descendant(2, 2));
  EXPECT_FALSE(is_strict_descendant(6, 2));
}
