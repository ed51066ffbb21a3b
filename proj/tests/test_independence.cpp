#include <gtest/gtest.h>

#include <set>

#include "caphs/independence.hpp"
#include "caphs/rng.hpp"

using namespace caphs;

namespace {

// Direct recount of the conflict predicate from its definition.
bool conflicting_by_recount(const IndependenceContext& ctx, ElementId x, ElementId y, const Instance& inst) {
  for (const auto& [s, indices] : ctx.stars) {
    std::int64_t ax = 0, ay = 0, both = 0;
    for (SetIndex i : indices) {
      const auto& set = inst.family()[i];
      const bool hx = std::find(set.begin(), set.end(), x) != set.end();
      const bool hy = std::find(set.begin(), set.end(), y) != set.end();
      ax += hx;
      ay += hy;
      both += hx && hy;
    }
    if (Rational(both) > Rational(std::min(ax, ay) * ctx.rho.num, ctx.rho.den)) return true;
  }
  return false;
}

struct RandomContext {
  Instance inst;
  IndependenceContext ctx;
  std::vector<ElementId> X;
  std::int64_t k = 0;
};

RandomContext random_context(std::uint64_t seed, Rational rho) {
  Rng rng(seed);
  RandomContext rc;
  rc.k = rng.uniform(1, 4);
  const int d = static_cast<int>(rng.uniform(1, 3));
  GenParams p;
  p.n = rng.uniform(static_cast<std::int64_t>(rc.k) + 2, 45);
  p.m = rng.uniform(5, 60);
  p.d = d;
  rc.inst = generate_instance(p, seed);
  const std::int64_t s_size = rng.uniform(1, rc.k);
  for (std::int64_t x : rng.subset(p.n, s_size)) rc.ctx.S.push_back(x);
  const auto cls = equivalence_classes(rc.inst, rc.ctx.S);
  Plurality pi;
  for (const auto& [E, idx] : cls.by_class) {
    const auto& owners = E.empty() ? rc.ctx.S : E;
    pi[E] = owners[rng.below(owners.size())];
  }
  rc.ctx.stars = stars(cls, pi);
  rc.ctx.rho = rho;
  std::vector<ElementId> rest;
  for (ElementId x : rc.inst.sorted_ids()) {
    if (!Instance::set_contains(rc.ctx.S, x)) rest.push_back(x);
  }
  const auto take = std::min<std::int64_t>(static_cast<std::int64_t>(rest.size()), 40);
  for (std::int64_t i : rng.subset(static_cast<std::int64_t>(rest.size()), take)) rc.X.push_back(rest[static_cast<std::size_t>(i)]);
  return rc;
}

}  // namespace

TEST(IsConflicting, DisjointNeverConflict) {
  const Instance inst(2, {{0, 1, 1, 1}, {1, 1, 1, 1}, {2, 1, 1, 1}}, {{0, 1}, {0, 2}});
  IndependenceContext ctx{{0}, {{0, {0, 1}}}, Rational(1, 100)};
  EXPECT_FALSE(is_conflicting(ctx, 1, 2, inst));
}

TEST(IsConflicting, IdenticalIncidenceConflicts) {
  const Instance inst(3, {{0, 1, 1, 1}, {1, 1, 1, 1}, {2, 1, 1, 1}}, {{0, 1, 2}, {0, 1, 2}});
  IndependenceContext ctx{{0}, {{0, {0, 1}}}, Rational(1, 2)};
  EXPECT_TRUE(is_conflicting(ctx, 1, 2, inst));
  EXPECT_EQ(count_conflicting_pairs(ctx, {1, 2}, inst), 1);
}

TEST(IsConflicting, MatchesRecountAndIsSymmetric) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto rc = random_context(seed, Rational(1, 4));
    for (std::size_t a = 0; a < rc.X.size() && a < 12; ++a) {
      for (std::size_t b = a + 1; b < rc.X.size() && b < 12; ++b) {
        const bool got = is_conflicting(rc.ctx, rc.X[a], rc.X[b], rc.inst);
        EXPECT_EQ(got, conflicting_by_recount(rc.ctx, rc.X[a], rc.X[b], rc.inst));
        EXPECT_EQ(got, is_conflicting(rc.ctx, rc.X[b], rc.X[a], rc.inst));
      }
    }
  }
}

TEST(CountConflictingPairs, DisjointIsZero) {
  const Instance inst(1, {{0, 1, 1, 1}, {1, 1, 1, 1}, {2, 1, 1, 1}}, {{0}, {1}, {2}});
  IndependenceContext ctx{{0}, {{0, {0}}}, Rational(1, 4)};
  EXPECT_EQ(count_conflicting_pairs(ctx, {1, 2}, inst), 0);
}

TEST(CountConflictingPairs, PairCountBound) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    for (const Rational rho : {Rational(1, 4), Rational(1, 16)}) {
      const auto rc = random_context(seed, rho);
      const std::int64_t pairs = count_conflicting_pairs(rc.ctx, rc.X, rc.inst);
      // pairs <= |X| d k / rho
      const __int128 lhs = static_cast<__int128>(pairs) * rho.num;
      const __int128 rhs = static_cast<__int128>(rc.X.size()) * rc.inst.d() * rc.k * rho.den;
      EXPECT_LE(static_cast<long long>(lhs), static_cast<long long>(rhs));
    }
  }
}

TEST(FindIndependentSet, DisjointTakesFirstIds) {
  const Instance inst(1, {{0, 1, 1, 1}, {1, 1, 1, 1}, {2, 1, 1, 1}, {3, 1, 1, 1}, {4, 1, 1, 1}, {5, 1, 1, 1}},
                      {{0}, {1}, {2}, {3}, {4}, {5}});
  IndependenceContext ctx{{}, {}, Rational(1, 4)};
  const auto I = find_independent_set(ctx, {{5, 1, 3}, {4, 2, 0}}, {2, 2}, inst);
  ASSERT_TRUE(I);
  EXPECT_EQ(*I, (std::vector<ElementId>{0, 1, 2, 3}));
}

TEST(FindIndependentSet, AllConflictingFails) {
  const Instance inst(3, {{0, 1, 1, 1}, {1, 1, 1, 1}, {2, 1, 1, 1}}, {{0, 1, 2}});
  IndependenceContext ctx{{0}, {{0, {0}}}, Rational(1, 2)};
  EXPECT_FALSE(find_independent_set(ctx, {{1, 2}}, {2}, inst));
}

TEST(FindIndependentSet, QuotaInvalid) {
  const Instance inst(1, {{0, 1, 1, 1}}, {{0}});
  IndependenceContext ctx;
  for (const auto& quotas : {std::vector<int>{3}, std::vector<int>{0}, std::vector<int>{1, 1}}) {
    try {
      find_independent_set(ctx, {{0}}, quotas, inst);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kQuotaInvalid);
    }
  }
}

TEST(FindIndependentSet, LargeSparsePartsSucceed) {
  // l = 2 parts, k = 2, d = 2, rho = 1/4: parts of size >= 2 (l+1)(k+1) d k / rho = 288.
  const std::int64_t part_size = 300;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    std::vector<Element> elements;
    const std::int64_t n = 2 * part_size + 2;
    for (std::int64_t i = 0; i < n; ++i) elements.push_back({i, 1, 1, 1});
    std::vector<Subset> family;
    // sets {s, x} for s in S = {0, 1}, sparse random partners
    for (int j = 0; j < 400; ++j) family.push_back(make_subset({rng.uniform(0, 1), rng.uniform(2, n - 1)}));
    const Instance inst(2, elements, family);
    const auto cls = equivalence_classes(inst, {0, 1});
    Plurality pi;
    for (const auto& [E, idx] : cls.by_class) pi[E] = E.empty() ? 0 : E.front();
    IndependenceContext ctx{{0, 1}, stars(cls, pi), Rational(1, 4)};
    std::vector<std::vector<ElementId>> parts(2);
    for (std::int64_t x = 2; x < n; ++x) parts[static_cast<std::size_t>((x - 2) / part_size)].push_back(x);
    const auto I = find_independent_set(ctx, parts, {2, 2}, inst);
    ASSERT_TRUE(I) << "seed " << seed;
    ASSERT_EQ(I->size(), 4u);
    for (std::size_t a = 0; a < I->size(); ++a) {
      for (std::size_t b = a + 1; b < I->size(); ++b) EXPECT_FALSE(conflicting_by_recount(ctx, (*I)[a], (*I)[b], inst));
    }
    for (const auto& part : parts) {
      std::int64_t hits = 0;
      for (ElementId x : *I) hits += std::count(part.begin(), part.end(), x);
      EXPECT_EQ(hits, 2);
    }
  }
}
