#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "prioq/registry.hpp"

namespace prioq {
namespace {

PriorityRegistry make(std::initializer_list<double> levels) {
  PriorityRegistry r;
  CustomerId id = 0;
  for (double p : levels) r.insert({p, id++});
  return r;
}

TEST(Registry, CountGt) {
  EXPECT_EQ(count_gt(PriorityRegistry{}, 0.3), 0u);
  const auto r = make({0.2, 0.5, 0.9});
  EXPECT_EQ(count_gt(r, 0.5), 1u);
  EXPECT_EQ(count_gt(r, 0.0), 3u);
}

TEST(Registry, CountLeq) {
  const auto r = make({0.2, 0.5, 0.9});
  EXPECT_EQ(count_leq(r, 0.5), 2u);
  EXPECT_EQ(count_leq(PriorityRegistry{}, 0.5), 0u);
  EXPECT_EQ(count_leq(make({0.2}), 1.0), 1u);
}

TEST(Registry, CountIn) {
  const auto r = make({0.2, 0.5, 0.9});
  EXPECT_EQ(count_in(r, 0.2, 0.5), 1u);
  EXPECT_EQ(count_in(r, 0.7, 0.7), 0u);
  EXPECT_EQ(count_in(r, 0.0, 1.0), 3u);
  EXPECT_THROW(count_in(r, 0.6, 0.5), std::invalid_argument);
}

TEST(Registry, TiesFavourEarlierArrival) {
  PriorityRegistry r;
  r.insert({0.5, 3});
  r.insert({0.5, 1});
  r.insert({0.4, 0});
  EXPECT_EQ(r.at_rank_from_top(0).id, 1u);
  EXPECT_EQ(r.at_rank_from_top(1).id, 3u);
  EXPECT_EQ(r.at_rank_from_top(2).id, 0u);
  EXPECT_EQ(r.count_gt(0.5), 0u);
  EXPECT_EQ(r.count_leq(0.5), 3u);
  EXPECT_EQ(r.count_lt(0.5), 1u);
  EXPECT_TRUE(r.in_service({0.5, 1}, 1));
  EXPECT_FALSE(r.in_service({0.5, 3}, 1));
}

TEST(Registry, EraseMissingThrows) {
  auto r = make({0.1});
  EXPECT_THROW(r.erase({0.1, 9}), std::out_of_range);
  r.erase({0.1, 0});
  EXPECT_TRUE(r.empty());
}

// Rank queries agree with a brute-force scan under random inserts/erases.
TEST(Registry, MatchesBruteForce) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PriorityRegistry r;
  std::vector<RegistryEntry> shadow;
  CustomerId next = 0;
  for (int step = 0; step < 4000; ++step) {
    if (shadow.empty() || unit(gen) < 0.6) {
      // Coarse levels force ties.
      const RegistryEntry e{std::floor(unit(gen) * 50.0) / 50.0, next++};
      r.insert(e);
      shadow.push_back(e);
    } else {
      const auto i = static_cast<std::size_t>(unit(gen) * shadow.size());
      r.erase(shadow[i]);
      shadow.erase(shadow.begin() + static_cast<std::ptrdiff_t>(i));
    }
    const double p = std::floor(unit(gen) * 52.0) / 50.0 - 0.01;
    const double q = p + unit(gen) * 0.3;
    auto gt = std::count_if(shadow.begin(), shadow.end(), [&](auto& e) { return e.priority > p; });
    auto in = std::count_if(shadow.begin(), shadow.end(),
                            [&](auto& e) { return e.priority >= p && e.priority < q; });
    ASSERT_EQ(r.size(), shadow.size());
    ASSERT_EQ(r.count_gt(p), static_cast<std::size_t>(gt));
    ASSERT_EQ(r.count_leq(p) + r.count_gt(p), r.size());
    ASSERT_EQ(r.count_in(p, q), static_cast<std::size_t>(in));

    auto sorted = shadow;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < std::min<std::size_t>(sorted.size(), 3); ++k)
      ASSERT_EQ(r.at_rank_from_top(k), sorted[sorted.size() - 1 - k]);
    std::vector<double> levels;
    for (auto& e : sorted) levels.push_back(e.priority);
    if (step % 100 == 0) ASSERT_EQ(r.priorities(), levels);
  }
}

}  // namespace
}  // namespace prioq
