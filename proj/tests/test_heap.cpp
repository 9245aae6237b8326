#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <random>
#include <set>
#include <vector>

#include "flatpq/heap.hpp"
#include "test_support.hpp"

using namespace flatpq;
using namespace flatpq::testing;

TEST(NewHeap, StartsEmpty) {
  binary_heap h(8);
  EXPECT_EQ(h.size(), 0u);
  EXPECT_EQ(h.capacity(), 8u);
  EXPECT_TRUE(h.flags_clear());
  EXPECT_TRUE(h.is_valid());
}

TEST(NewHeap, SingleSlot) {
  binary_heap h(1, growth_policy::fixed);
  h.insert_path(5);
  EXPECT_EQ(h.size(), 1u);
  EXPECT_EQ(h.at(1), 5);
}

TEST(NewHeap, ZeroCapacityRejected) { EXPECT_THROW(binary_heap(0), std::invalid_argument); }

TEST(ExtractMin, MovesTailToRootAndSifts) {
  auto h = heap_layout({1, 5, 3, 8, 6});
  EXPECT_EQ(h.extract_min(), 1);
  EXPECT_EQ(layout(h), (std::vector<key_type>{3, 5, 6, 8}));
}

TEST(ExtractMin, EmptyReturnsNothing) {
  binary_heap h(4);
  EXPECT_EQ(h.extract_min(), std::nullopt);
}

TEST(ExtractMin, SingleElement) {
  auto h = heap_layout({7});
  EXPECT_EQ(h.extract_min(), 7);
  EXPECT_TRUE(h.empty());
}

TEST(SiftDown, HandTrace) {
  auto h = heap_layout({9, 2, 3, 4});
  h.sift_down(1);
  EXPECT_EQ(layout(h), (std::vector<key_type>{2, 4, 3, 9}));
}

TEST(SiftDown, AlreadyValid) {
  auto h = heap_layout({1, 2, 3});
  h.sift_down(1);
  EXPECT_EQ(layout(h), (std::vector<key_type>{1, 2, 3}));
}

TEST(SiftDown, Leaf) {
  auto h = heap_layout({5});
  h.sift_down(1);
  EXPECT_EQ(layout(h), (std::vector<key_type>{5}));
}

TEST(SiftDown, OutOfRange) {
  auto h = heap_layout({1, 2});
  EXPECT_THROW(h.sift_down(0), std::out_of_range);
  EXPECT_THROW(h.sift_down(3), std::out_of_range);
}

TEST(InsertPath, DisplacesAlongPath) {
  auto h = heap_layout({1, 5, 3, 8});
  h.insert_path(2);
  EXPECT_EQ(layout(h), (std::vector<key_type>{1, 2, 3, 8, 5}));
  EXPECT_TRUE(h.is_valid());
}

TEST(InsertPath, IntoEmpty) {
  binary_heap h(2);
  h.insert_path(4);
  EXPECT_EQ(layout(h), (std::vector<key_type>{4}));
}

TEST(InsertPath, NewMinimumDisplacesRoot) {
  auto h = heap_layout({1});
  h.insert_path(0);
  EXPECT_EQ(layout(h), (std::vector<key_type>{0, 1}));
}

TEST(InsertPath, FixedCapacityExhausted) {
  binary_heap h(2, growth_policy::fixed);
  h.insert_path(1);
  h.insert_path(2);
  EXPECT_THROW(h.insert_path(3), std::length_error);
}

TEST(InsertPath, GrowsByDoubling) {
  binary_heap h(2);
  for (int i = 0; i < 5; ++i) h.insert_path(10 - i);
  EXPECT_EQ(h.capacity(), 8u);
  EXPECT_TRUE(h.is_valid());
}

TEST(InsertPath, VisitsWholePath) {
  binary_heap h(1);
  key_generator gen(3);
  for (std::size_t s = 0; s < 5000; ++s) {
    const std::size_t expected = static_cast<std::size_t>(std::bit_width(s + 1));  // floor(log2(s+1)) + 1
    ASSERT_EQ(h.insert_path(gen.uniform(1000)), expected) << "size " << s;
  }
}

TEST(InsertClassic, KeepsMultiset) {
  auto h = heap_layout({1, 5, 3, 8});
  h.insert_classic(2);
  EXPECT_TRUE(h.is_valid());
  EXPECT_EQ(contents(h), (std::vector<key_type>{1, 2, 3, 5, 8}));
}

TEST(InsertClassic, IntoEmpty) {
  binary_heap h(1);
  h.insert_classic(9);
  EXPECT_EQ(layout(h), (std::vector<key_type>{9}));
}

TEST(InsertClassic, Duplicates) {
  auto h = heap_layout({2});
  h.insert_classic(2);
  EXPECT_EQ(layout(h), (std::vector<key_type>{2, 2}));
}

TEST(FindKSmallest, Example) {
  auto h = heap_layout({1, 3, 2, 7, 8, 4, 9});
  const auto got = h.find_k_smallest(3);
  const std::vector<slot_value> want{{1, 1}, {3, 2}, {2, 3}};
  EXPECT_EQ(got, want);
}

TEST(FindKSmallest, ZeroAndSingle) {
  auto h = heap_layout({5});
  EXPECT_TRUE(h.find_k_smallest(0).empty());
  EXPECT_EQ(h.find_k_smallest(1), (std::vector<slot_value>{{1, 5}}));
  EXPECT_THROW(h.find_k_smallest(2), std::out_of_range);
}

// Oracle: full sort of occupied slots by (value, slot).
static std::vector<slot_value> brute_k_smallest(const binary_heap& h, std::size_t k) {
  std::vector<slot_value> all;
  for (slot_index v = 1; v <= h.size(); ++v) all.push_back({v, h.at(v)});
  std::sort(all.begin(), all.end(), [](auto a, auto b) { return a.value != b.value ? a.value < b.value : a.slot < b.slot; });
  all.resize(k);
  return all;
}

TEST(FindKSmallest, MatchesFullSortForAllK) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng() % 1000;
    // small ranges force many ties
    auto h = random_heap(n, rng(), trial % 2 ? 20 : 1'000'000);
    for (std::size_t k = 0; k <= n; ++k) {
      const auto got = h.find_k_smallest(k);
      ASSERT_EQ(got, brute_k_smallest(h, k)) << "n=" << n << " k=" << k;
      // root-containing connected subtree
      for (const auto& sv : got) ASSERT_TRUE(sv.slot == 1 || std::any_of(got.begin(), got.end(), [&](auto p) { return p.slot == sv.slot / 2; }));
    }
  }
}

TEST(Validity, Examples) {
  EXPECT_TRUE(heap_layout({1, 2, 3}).is_valid());
  EXPECT_FALSE(heap_layout({3, 2}).is_valid());
  auto h = heap_layout({1, 2, 3});
  h.flags(2).store(node_flag::locked);
  EXPECT_FALSE(h.is_valid());
}

TEST(Validity, RandomOperationsKeepLedger) {
  std::mt19937_64 rng(5);
  binary_heap h(4);
  std::multiset<key_type> ledger;
  for (int i = 0; i < 20000; ++i) {
    const auto roll = rng() % 3;
    if (roll == 0) {
      const key_type x = static_cast<key_type>(rng() % 500);
      h.insert_path(x);
      ledger.insert(x);
    } else if (roll == 1) {
      const key_type x = static_cast<key_type>(rng() % 500);
      h.insert_classic(x);
      ledger.insert(x);
    } else {
      const auto m = h.extract_min();
      if (ledger.empty()) {
        ASSERT_FALSE(m);
      } else {
        ASSERT_EQ(m, *ledger.begin());
        ledger.erase(ledger.begin());
      }
    }
    if (i % 997 == 0) {
      ASSERT_TRUE(h.is_valid());
      ASSERT_EQ(contents(h), std::vector<key_type>(ledger.begin(), ledger.end()));
    }
  }
  ASSERT_TRUE(h.is_valid());
}

TEST(Validity, DrainIsHeapsort) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    key_generator gen(seed);
    binary_heap h(1);
    std::vector<key_type> inserted;
    for (int i = 0; i < 10000; ++i) {
      inserted.push_back(gen.uniform(1000));
      if (i % 2) h.insert_path(inserted.back());
      else h.insert_classic(inserted.back());
    }
    std::vector<key_type> drained;
    while (auto m = h.extract_min()) drained.push_back(*m);
    EXPECT_EQ(drained, sorted(inserted));
  }
}

TEST(KeyMultiset, DifferenceRespectsMultiplicity) {
  key_multiset a(std::vector<key_type>{1, 2, 2, 3});
  key_multiset b(std::vector<key_type>{2, 3, 4});
  EXPECT_EQ((a - b).sorted().size(), 2u);
  EXPECT_EQ((a - b), key_multiset(std::vector<key_type>{1, 2}));
  a += b;
  EXPECT_EQ(a.size(), 7u);
  EXPECT_TRUE(a.remove(4));
  EXPECT_FALSE(a.remove(9));
}

TEST(Heap, CopyPreservesContentAndFlags) {
  auto h = heap_layout({1, 2, 3});
  h.flags(3).store(node_flag::split);
  binary_heap copy = h;
  EXPECT_EQ(layout(copy), layout(h));
  EXPECT_EQ(copy.flags(3).load(), node_flag::split);
}
