#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "flatpq/ordered_key_set.hpp"

using namespace flatpq;

TEST(OrderedKeySet, PopInsertExchange) {
  ordered_key_set s(std::vector<key_type>{5, 1, 3});
  EXPECT_EQ(s.min(), 1);
  EXPECT_EQ(s.pop_min(), 1);
  s.insert(0);  // reuses the popped prefix slot
  EXPECT_EQ(std::vector<key_type>(s.view().begin(), s.view().end()), (std::vector<key_type>{0, 3, 5}));
  EXPECT_EQ(s.exchange_min(4), 0);
  EXPECT_EQ(std::vector<key_type>(s.view().begin(), s.view().end()), (std::vector<key_type>{3, 4, 5}));
}

TEST(OrderedKeySet, SplitKeepsSmallestPrefix) {
  ordered_key_set s(std::vector<key_type>{9, 2, 7, 4});
  s.pop_min();
  ordered_key_set rest;
  s.split_off(1, rest);
  EXPECT_EQ(std::vector<key_type>(s.view().begin(), s.view().end()), (std::vector<key_type>{4}));
  EXPECT_EQ(std::vector<key_type>(rest.view().begin(), rest.view().end()), (std::vector<key_type>{7, 9}));
}

// Property: any operation mix keeps the view sorted and equal to a reference
// multiset.
TEST(OrderedKeySet, StaysSortedUnderRandomOps) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    ordered_key_set s;
    std::vector<key_type> ref;
    for (int i = 0; i < 60; ++i) {
      const auto op = rng() % 4;
      const key_type x = static_cast<key_type>(rng() % 20);
      if (op == 0 || ref.empty()) {
        s.insert(x);
        ref.push_back(x);
      } else if (op == 1) {
        std::sort(ref.begin(), ref.end());
        ASSERT_EQ(s.pop_min(), ref.front());
        ref.erase(ref.begin());
      } else if (op == 2) {
        std::sort(ref.begin(), ref.end());
        ASSERT_EQ(s.exchange_min(x), ref.front());
        ref.front() = x;
      } else {
        ordered_key_set rest;
        const std::size_t keep = rng() % (ref.size() + 1);
        s.split_off(keep, rest);
        std::sort(ref.begin(), ref.end());
        ASSERT_EQ(std::vector<key_type>(rest.view().begin(), rest.view().end()),
                  std::vector<key_type>(ref.begin() + static_cast<std::ptrdiff_t>(keep), ref.end()));
        ref.resize(keep);
      }
      std::sort(ref.begin(), ref.end());
      ASSERT_TRUE(std::is_sorted(s.view().begin(), s.view().end()));
      ASSERT_EQ(std::vector<key_type>(s.view().begin(), s.view().end()), ref);
    }
  }
}
