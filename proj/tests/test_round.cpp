#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "flatpq/executor.hpp"
#include "flatpq/round.hpp"
#include "test_support.hpp"

using namespace flatpq;
using namespace flatpq::testing;

// Oracle: run every extract against the heap in ascending order, then every
// insert.
static std::vector<std::optional<key_type>> sequential_round(binary_heap& h, std::size_t extracts,
                                                             const std::vector<key_type>& inserts) {
  std::vector<std::optional<key_type>> out;
  for (std::size_t i = 0; i < extracts; ++i) out.push_back(h.extract_min());
  for (key_type x : inserts) h.insert_classic(x);
  return out;
}

TEST(Round, EliminationExample) {
  auto h = heap_layout({3, 5, 4});
  const std::vector<key_type> ins{1, 9};
  deterministic_executor exec(std::uint64_t{0});
  const auto res = execute_round(h, 1, ins, exec);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0], 3);
  EXPECT_EQ(contents(h), (std::vector<key_type>{1, 4, 5, 9}));
  EXPECT_TRUE(h.is_valid());
}

TEST(Round, EliminationPlan) {
  auto h = heap_layout({3, 5, 4});
  const std::vector<key_type> ins{1, 9};
  extract_batch xb;
  const auto plan = plan_round(h, 1, ins, xb);
  EXPECT_EQ(plan.eliminated, 1u);
  EXPECT_EQ(plan.remaining_inserts, (std::vector<key_type>{9}));
  EXPECT_EQ(plan.final_size, 4u);
}

TEST(Round, ExtractOnlyReduces) {
  auto h = heap_layout({1, 2, 3, 4});
  deterministic_executor exec(std::uint64_t{0});
  const auto res = execute_round(h, 2, {}, exec);
  EXPECT_EQ(res, (std::vector<std::optional<key_type>>{1, 2}));
  EXPECT_EQ(contents(h), (std::vector<key_type>{3, 4}));
}

TEST(Round, ExcessExtractsAreEmpty) {
  binary_heap h(1);
  deterministic_executor exec(std::uint64_t{0});
  EXPECT_EQ(execute_round(h, 1, {}, exec), (std::vector<std::optional<key_type>>{std::nullopt}));

  auto g = heap_layout({7});
  const std::vector<key_type> ins{8};
  const auto res = execute_round(g, 3, ins, exec);
  EXPECT_EQ(res, (std::vector<std::optional<key_type>>{7, std::nullopt, std::nullopt}));
  EXPECT_EQ(layout(g), (std::vector<key_type>{8}));
}

// The extract sees the smallest value even when it was inserted in the same
// round.
TEST(Round, InsertedValueIsNotSeenByExtract) {
  auto h = heap_layout({5});
  const std::vector<key_type> ins{1};
  deterministic_executor exec(std::uint64_t{0});
  EXPECT_EQ(execute_round(h, 1, ins, exec)[0], 5);
  EXPECT_EQ(layout(h), (std::vector<key_type>{1}));
}

TEST(Round, MatchesSequentialOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    auto h = random_heap(rng() % 200, rng(), trial % 2 ? 10 : 100'000);
    auto ref = h;
    const std::size_t e = rng() % 17;
    std::vector<key_type> ins(rng() % 17);
    for (auto& x : ins) x = static_cast<key_type>(rng() % (trial % 2 ? 10 : 100'000));
    std::sort(ins.begin(), ins.end());
    deterministic_executor exec(rng());
    const auto got = execute_round(h, e, ins, exec);
    const auto want = sequential_round(ref, e, ins);
    ASSERT_EQ(got, want) << "trial " << trial;
    ASSERT_TRUE(h.is_valid());
    ASSERT_EQ(contents(h), contents(ref));
  }
}
