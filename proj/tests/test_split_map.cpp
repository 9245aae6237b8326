#include <gtest/gtest.h>

#include <map>
#include <random>
#include <utility>

#include "flatpq/split_map.hpp"

using namespace flatpq;

// Oracle: walk each target's root path from its binary representation and
// record which child every path node continues into.
static std::map<slot_index, std::pair<std::size_t, std::size_t>> split_oracle(std::size_t size, std::size_t k) {
  std::map<slot_index, std::pair<std::size_t, std::size_t>> below;
  for (slot_index t = size + 1; t <= size + k; ++t) {
    for (unsigned up = 1; up <= slot_depth(t); ++up) {
      const slot_index node = t >> up;
      const slot_index child = t >> (up - 1);
      auto& counts = below[node];
      (child % 2 == 0 ? counts.first : counts.second) += 1;
    }
  }
  std::map<slot_index, std::pair<std::size_t, std::size_t>> splits;
  for (const auto& [node, counts] : below)
    if (counts.first > 0 && counts.second > 0) splits[node] = counts;
  return splits;
}

static std::map<slot_index, std::pair<std::size_t, std::size_t>> as_map(const split_map& m) {
  std::map<slot_index, std::pair<std::size_t, std::size_t>> out;
  for (const auto& e : m.entries()) out[e.slot] = {e.left_targets, e.right_targets};
  return out;
}

TEST(SplitNodes, ThreeTargetsOverFour) {
  const auto m = compute_split_nodes(4, 3);
  const std::vector<split_entry> want{{1, 1, 2}, {3, 1, 1}};
  EXPECT_EQ(m.entries(), want);
  EXPECT_EQ(as_map(m), split_oracle(4, 3));
}

TEST(SplitNodes, SingleTargetHasNone) { EXPECT_TRUE(compute_split_nodes(10, 1).entries().empty()); }

TEST(SplitNodes, RootSplits) {
  const std::vector<split_entry> want{{1, 1, 1}};
  EXPECT_EQ(compute_split_nodes(1, 2).entries(), want);
}

TEST(SplitNodes, ZeroTargetsRejected) { EXPECT_THROW(compute_split_nodes(3, 0), std::invalid_argument); }

TEST(SplitNodes, MatchesPathOracle) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 3000; ++i) {
    const std::size_t size = rng() % (i < 1500 ? 64 : 1'000'000);
    const std::size_t k = 1 + rng() % 256;
    ASSERT_EQ(as_map(compute_split_nodes(size, k)), split_oracle(size, k)) << size << " " << k;
  }
}

TEST(SplitNodes, ExactlyKMinusOneWhenTargetsAreLeaves) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t k = 1 + rng() % 256;
    const std::size_t size = k - 1 + rng() % 1'000'000;
    const auto m = compute_split_nodes(size, k);
    ASSERT_EQ(m.size(), k - 1) << size << " " << k;
    for (const auto& e : m.entries()) ASSERT_EQ(e.left_targets + e.right_targets, m.targets_below(e.slot));
  }
}

// In a tiny heap a target can sit above other targets; it keeps one value and
// needs no split of its own.
TEST(SplitNodes, TargetAboveTargets) {
  EXPECT_TRUE(compute_split_nodes(0, 2).entries().empty());
  const std::vector<split_entry> want{{1, 1, 1}};
  EXPECT_EQ(compute_split_nodes(0, 3).entries(), want);
}

TEST(TargetsInSubtree, CountsAcrossLevels) {
  EXPECT_EQ(targets_in_subtree(1, 5, 7), 3u);
  EXPECT_EQ(targets_in_subtree(2, 5, 7), 1u);
  EXPECT_EQ(targets_in_subtree(3, 5, 7), 2u);
  EXPECT_EQ(targets_in_subtree(2, 2, 4), 2u);  // slot 2 itself and slot 4
  EXPECT_EQ(targets_in_subtree(8, 5, 7), 0u);
}
