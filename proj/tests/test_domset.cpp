#include <gtest/gtest.h>

#include <functional>

#include "caphs/domset.hpp"
#include "caphs/rng.hpp"
#include "oracles.hpp"

using namespace caphs;

namespace {

std::vector<std::vector<std::int64_t>> adjacency(const BipartiteGraph& g) {
  std::vector<std::vector<std::int64_t>> out;
  for (std::int64_t b : g.blues) out.push_back(g.neighbors(b));
  return out;
}

// Second exhaustive search: recursive include/exclude over free reds.
std::optional<std::vector<std::int64_t>> min_forced_by_recursion(const BipartiteGraph& g, const std::vector<std::int64_t>& forced) {
  std::optional<std::vector<std::int64_t>> best;
  std::vector<std::int64_t> cur = forced;
  std::vector<std::int64_t> free;
  for (std::int64_t r : g.reds) {
    if (std::find(forced.begin(), forced.end(), r) == forced.end()) free.push_back(r);
  }
  std::function<void(std::size_t)> rec = [&](std::size_t j) {
    if (j == free.size()) {
      std::vector<std::int64_t> D = cur;
      std::sort(D.begin(), D.end());
      if (dominates(g, D) && (!best || D.size() < best->size() || (D.size() == best->size() && D < *best))) best = D;
      return;
    }
    cur.push_back(free[j]);
    rec(j + 1);
    cur.pop_back();
    rec(j + 1);
  };
  rec(0);
  return best;
}

}  // namespace

TEST(ConstructSmallDominator, SharedRed) {
  BipartiteGraph g;
  g.reds = {1, 2, 3};
  g.blues = {10, 11};
  g.adj = {{10, {1, 2}}, {11, {1, 3}}};
  EXPECT_EQ(construct_small_dominator(g), (std::vector<std::int64_t>{1}));
  EXPECT_EQ(oracle::min_dominator_size(4, {{1, 2}, {1, 3}}), 1u);
}

TEST(ConstructSmallDominator, CompleteBipartite) {
  BipartiteGraph g;
  g.reds = {0, 1};
  g.blues = {0, 1, 2};
  g.adj = {{0, {0, 1}}, {1, {0, 1}}, {2, {0, 1}}};
  const auto D = construct_small_dominator(g);
  EXPECT_EQ(D, (std::vector<std::int64_t>{0}));
}

TEST(ConstructSmallDominator, Preconditions) {
  BipartiteGraph g;
  g.reds = {0, 1, 2};
  g.blues = {0};
  g.adj = {{0, {0, 1}}};
  EXPECT_THROW(construct_small_dominator(g), Error);
  BipartiteGraph h;
  h.reds = {0, 1};
  h.blues = {0, 1};
  h.adj = {{0, {0}}, {1, {0, 1}}};
  EXPECT_THROW(construct_small_dominator(h), Error);
}

TEST(ConstructSmallDominator, RandomBound) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    BipartiteGraph g;
    const std::int64_t b = rng.uniform(2, 12);
    const std::int64_t r = rng.uniform(2, std::min<std::int64_t>(12, 2 * b - 1));
    for (std::int64_t i = 0; i < r; ++i) g.reds.push_back(i);
    for (std::int64_t i = 0; i < b; ++i) {
      g.blues.push_back(i);
      const std::int64_t deg = rng.uniform(2, r);
      g.adj[i] = rng.subset(r, deg);
    }
    const auto D = construct_small_dominator(g);
    EXPECT_TRUE(dominates(g, D));
    EXPECT_LE(static_cast<std::int64_t>(D.size()), (b + r) / 3);
    if (r <= 8) {
      EXPECT_LE(oracle::min_dominator_size(static_cast<std::size_t>(r), adjacency(g)).value(), D.size());
    }
  }
}

TEST(MinDominatorForced, EmptyBlues) {
  BipartiteGraph g;
  g.reds = {0, 1};
  EXPECT_EQ(min_dominator_forced(g, {}), std::vector<std::int64_t>{});
}

TEST(MinDominatorForced, ForcedPlusUnique) {
  BipartiteGraph g;
  g.reds = {1, 2};
  g.blues = {0};
  g.adj = {{0, {2}}};
  EXPECT_EQ(min_dominator_forced(g, {1}), (std::vector<std::int64_t>{1, 2}));
}

TEST(MinDominatorForced, UndominatableBlue) {
  BipartiteGraph g;
  g.reds = {0};
  g.blues = {0};
  EXPECT_FALSE(min_dominator_forced(g, {}));
}

TEST(MinDominatorForced, MatchesRecursiveSearch) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Rng rng(seed);
    BipartiteGraph g;
    const std::int64_t r = rng.uniform(1, 6);
    const std::int64_t b = rng.uniform(0, 6);
    for (std::int64_t i = 0; i < r; ++i) g.reds.push_back(i);
    for (std::int64_t i = 0; i < b; ++i) {
      g.blues.push_back(i);
      g.adj[i] = rng.subset(r, rng.uniform(0, r));
    }
    std::vector<std::int64_t> forced = rng.subset(r, rng.uniform(0, std::min<std::int64_t>(2, r)));
    EXPECT_EQ(min_dominator_forced(g, forced), min_forced_by_recursion(g, forced)) << "seed " << seed;
  }
}
