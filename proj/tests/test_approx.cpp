#include <gtest/gtest.h>

#include "caphs/approx.hpp"
#include "caphs/exact.hpp"
#include "oracles.hpp"

using namespace caphs;

namespace {

Instance unit_instance(std::int64_t n, const std::vector<Subset>& family, std::int64_t cap = 1) {
  std::vector<Element> elements;
  for (std::int64_t i = 0; i < n; ++i) elements.push_back({i, cap, 1, 1});
  int d = 1;
  for (const auto& s : family) d = std::max(d, static_cast<int>(s.size()));
  return Instance(d, elements, family);
}

std::int64_t cover(const Assignment& asg, ElementId x, const std::vector<SetIndex>& idx) { return coverage(asg, x, idx); }

// Checks every clause of a good tuple against (opt, asg) independently.
void expect_good_tuple(const AnnotatedTuple& t, const Solution& opt, const Assignment& asg, const Instance& inst,
                       const SolverConfig& cfg) {
  const Rational base = cfg.effective_base(t.k());
  auto bucket_ok = [&](std::int64_t gamma, std::int64_t c) {
    if (c == 0) return gamma == 0;
    const std::int64_t p = oracle::bucket_exponent(c, base);
    boost::multiprecision::cpp_int num = 1, den = 1;
    for (std::int64_t i = 0; i < p; ++i) {
      num *= base.num;
      den *= base.den;
    }
    boost::multiprecision::cpp_int ceil = (num + den - 1) / den;
    return boost::multiprecision::cpp_int(gamma) == ceil;
  };
  for (ElementId s : t.S) EXPECT_GT(opt.count(s), 0);
  std::map<Subset, std::vector<SetIndex>> classes;
  for (SetIndex i = 0; i < inst.m(); ++i) {
    Subset E;
    for (ElementId x : inst.family()[i]) {
      if (std::binary_search(t.S.begin(), t.S.end(), x)) E.push_back(x);
    }
    classes[E].push_back(i);
  }
  for (const auto& [E, idx] : classes) {
    for (std::size_t i = 0; i < t.X.size(); ++i) {
      ElementId rep = -1;
      for (ElementId x : t.X[i]) {
        if (opt.count(x)) rep = x;
      }
      ASSERT_GE(rep, 0);
      EXPECT_TRUE(bucket_ok(t.gamma(i, E), cover(asg, rep, idx)));
    }
    for (ElementId s : t.S) EXPECT_TRUE(bucket_ok(t.gamma_of(s, E), cover(asg, s, idx)));
    if (t.S.empty()) continue;
    const ElementId owner = t.pi.at(E);
    for (ElementId s : t.S) {
      EXPECT_GE(cover(asg, owner, idx), cover(asg, s, idx));
      if (s < owner) {
        EXPECT_GT(cover(asg, owner, idx), cover(asg, s, idx));
      }
    }
  }
}

}  // namespace

TEST(Bucket, Examples) {
  const Rational base(10, 9);
  EXPECT_EQ(bucket_exponent(1, base), 0);
  EXPECT_EQ(bucket_value(1, base), 1);
  EXPECT_EQ(bucket_exponent(9, base), 20);
  EXPECT_EQ(bucket_value(9, base), 9);
  EXPECT_EQ(bucket_exponent(10, base), 21);
  EXPECT_EQ(bucket_value(10, base), 10);
  EXPECT_THROW(bucket_value(0, base), Error);
  EXPECT_THROW(BucketScale(Rational(1)), Error);
}

TEST(Bucket, MatchesOracleExponent) {
  for (std::int64_t k = 1; k <= 4; ++k) {
    const Rational base(3 * k + 1, 3 * k);
    BucketScale scale(base);
    for (std::int64_t c = 1; c <= 500; ++c) {
      EXPECT_EQ(scale.exponent(c), oracle::bucket_exponent(c, base));
      EXPECT_LE(scale.value(c), c);
    }
  }
}

TEST(Bucket, ValuesUpTo) {
  BucketScale scale(Rational(2));
  EXPECT_EQ(scale.values_up_to(9), (std::vector<std::int64_t>{1, 2, 4, 8}));
  EXPECT_TRUE(scale.values_up_to(0).empty());
}

TEST(Config, Defaults) {
  SolverConfig cfg;
  EXPECT_EQ(cfg.effective_rho(2), Rational(1, 16));
  EXPECT_EQ(cfg.effective_top_t(3, 2), 3 * 1024);
  EXPECT_EQ(cfg.effective_threshold(3, 2), 3 * 2048);
  EXPECT_EQ(cfg.effective_base(3), Rational(10, 9));
  EXPECT_EQ(cfg.effective_threshold(3, 100), std::numeric_limits<std::int64_t>::max());
  cfg.rho = Rational(0);
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(InfoTuple, CapacityFilter) {
  // S = {0}; parts {1}, {2}; cap(1) = 1 < gamma(0, {0}) = 2 drops it.
  const Instance inst = unit_instance(3, {{0, 1}, {0, 1}, {0, 2}, {0, 2}});
  AnnotatedTuple t;
  t.S = {0};
  t.X = {{1, 2}};
  t.pi[{0}] = 0;
  t.gamma_part[{0, {0}}] = 2;
  const InfoTuple info = info_tuple(t, inst, SolverConfig{});
  EXPECT_TRUE(info.Xp[0].empty());
}

TEST(InfoTuple, CoverageFilterAndScores) {
  const Instance inst = unit_instance(3, {{0, 1}, {0, 1}, {0, 2}, {2}}, 3);
  AnnotatedTuple t;
  t.S = {0};
  t.X = {{1, 2}};
  t.pi[{0}] = 0;
  t.pi[{}] = 0;
  t.gamma_part[{0, {0}}] = 2;
  const InfoTuple info = info_tuple(t, inst, SolverConfig{});
  // |A_{0} (.) 1| = 2 >= 2, |A_{0} (.) 2| = 1 < 2
  EXPECT_EQ(info.Xp[0], (std::vector<ElementId>{1}));
  // n(1, {0}) = min(ceil(4/3 * 2), 2) = 2, n(1, {}) = 0, score = min(2, 3 - 0)
  EXPECT_EQ(info.n_of.at({1, Subset{0}}), 2);
  EXPECT_EQ(info.score_of(1, 0), 2);
}

TEST(InfoTuple, EmptySKeepsParts) {
  const Instance inst = unit_instance(4, {{0, 1}, {2, 3}});
  AnnotatedTuple t;
  t.X = {{0, 2}, {1, 3}};
  const InfoTuple info = info_tuple(t, inst, SolverConfig{});
  EXPECT_EQ(info.Xp, t.X);
  EXPECT_TRUE(info.score.empty());
}

TEST(CandidateSet, SmallPartKept) {
  const Instance inst = unit_instance(4, {{0, 1}, {2, 3}});
  SolverConfig cfg;
  cfg.small_class_threshold = 3;
  ExtendedTuple e;
  e.base.X = {{1, 2, 3}};
  const InfoTuple info = info_tuple(e.base, inst, cfg);
  EXPECT_EQ(candidate_set(e, info, inst, cfg), e.base.X);
  cfg.small_class_threshold = 2;
  EXPECT_EQ(candidate_set(e, info, inst, cfg), (Parts{{}}));
}

TEST(CandidateSet, TopScorersPerStar) {
  // S = {0, 1}; part 0 = {2, 3, 4}. Element 2 scores best for star 0, element 4 for star 1.
  const Instance inst =
      unit_instance(5, {{0, 2}, {0, 2}, {0, 3}, {0, 4}, {1, 4}, {1, 4}, {1, 3}, {1, 2}}, 5);
  SolverConfig cfg;
  cfg.small_class_threshold = 2;
  cfg.top_t = 1;
  ExtendedTuple e;
  e.base.S = {0, 1};
  e.base.X = {{2, 3, 4}};
  e.base.pi = {{{0}, 0}, {{1}, 1}};
  e.base.gamma_part = {{{0, {0}}, 1}, {{0, {1}}, 1}};
  const InfoTuple info = info_tuple(e.base, inst, cfg);
  ASSERT_EQ(info.Xp[0], (std::vector<ElementId>{2, 3, 4}));
  EXPECT_EQ(info.score_of(2, 0), 2);
  EXPECT_EQ(info.score_of(3, 0), 1);
  EXPECT_EQ(info.score_of(4, 1), 2);
  e.tau1 = {{0, 0}, {1, 0}};
  EXPECT_EQ(candidate_set(e, info, inst, cfg), (Parts{{2, 4}}));
  e.tau1 = {{0, 0}, {1, 1}};
  EXPECT_EQ(candidate_set(e, info, inst, cfg), (Parts{{2}}));
}

TEST(CandidateSet, TieBreakByLowestIds) {
  const Instance inst = unit_instance(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}}, 5);
  SolverConfig cfg;
  cfg.small_class_threshold = 2;
  cfg.top_t = 2;
  ExtendedTuple e;
  e.base.S = {0};
  e.base.X = {{5, 4, 3, 2, 1}};
  e.base.pi = {{{0}, 0}};
  e.tau1 = {{0, 0}};
  e.tau2 = {{0, 0}};
  const InfoTuple info = info_tuple(e.base, inst, cfg);
  EXPECT_EQ(candidate_set(e, info, inst, cfg), (Parts{{1, 2}}));
  e.tau1.clear();
  e.base.S.clear();
  e.base.pi.clear();
  EXPECT_EQ(candidate_set(e, info_tuple(e.base, inst, cfg), inst, cfg), (Parts{{}}));
}

TEST(SolveExtended, TauClash) {
  const Instance inst = unit_instance(3, {{0, 1}, {2}});
  ExtendedTuple e;
  e.base.S = {0};
  e.base.X = {{1}, {2}};
  e.base.pi = {{{0}, 0}, {{}, 0}};
  e.tau1 = {{0, 1}};
  e.tau2 = {{0, 1}};
  const auto res = solve_extended(e, inst, SolverConfig{});
  EXPECT_FALSE(res.sol);
  EXPECT_EQ(res.reason, FailureReason::kTauClash);
}

TEST(SolveExtended, NoPartsReturnsS) {
  const Instance inst = unit_instance(2, {{0}, {1}});
  ExtendedTuple e;
  e.base.S = {0, 1};
  const auto res = solve_extended(e, inst, SolverConfig{});
  ASSERT_TRUE(res.sol);
  EXPECT_EQ(*res.sol, Solution::of({0, 1}));
}

TEST(SolveExtended, EngineeredSuccess) {
  // S = {0}; parts {1, 2} and {3}; tau1(0) = 0 so part 0 takes two elements.
  const Instance inst = unit_instance(4, {{0}, {1}, {2}, {3}});
  SolverConfig cfg;
  cfg.rho = Rational(1, 4);
  cfg.top_t = 2;
  cfg.small_class_threshold = 4;
  ExtendedTuple e;
  e.base.S = {0};
  e.base.X = {{1, 2}, {3}};
  e.base.pi = {{{0}, 0}, {{}, 0}};
  e.tau1 = {{0, 0}};
  e.tau2 = {{0, 1}};
  const auto res = solve_extended(e, inst, cfg);
  ASSERT_TRUE(res.sol) << to_string(res.reason);
  EXPECT_EQ(*res.sol, Solution::of({0, 1, 2, 3}));
  EXPECT_LE(res.sol->size(), size_bound(3));
  EXPECT_TRUE(brute_force_assignment(inst, *res.sol));
}

TEST(SolveExtended, InfeasibleUnion) {
  const Instance inst = unit_instance(3, {{0}, {1}, {2}, {2}});
  ExtendedTuple e;
  e.base.S = {0};
  e.base.X = {{1}, {2}};
  e.base.pi = {{{0}, 0}, {{}, 0}};
  e.tau1 = {{0, 0}};
  e.tau2 = {{0, 1}};
  const auto res = solve_extended(e, inst, SolverConfig{});
  EXPECT_FALSE(res.sol);
  EXPECT_EQ(res.reason, FailureReason::kIndependenceFail);
}

TEST(SolveAnnotated, FullSFeasible) {
  const Instance inst = unit_instance(2, {{0}, {1}});
  AnnotatedTuple t;
  t.S = {0, 1};
  EXPECT_EQ(solve_annotated(t, inst, SolverConfig{}, EnumerateMode{}), Solution::of({0, 1}));
}

TEST(SolveAnnotated, ZeroBudget) {
  const Instance inst = unit_instance(2, {{0}, {1}});
  AnnotatedTuple t;
  t.X = {{0}, {1}};
  SolverConfig cfg;
  cfg.tuple_budget = 0;
  try {
    solve_annotated(t, inst, cfg, EnumerateMode{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBudgetExceeded);
  }
}

TEST(SolveAnnotated, EnumerateFindsSolution) {
  const Instance inst = unit_instance(4, {{0, 1}, {0, 2}, {3}}, 2);
  AnnotatedTuple t;
  t.X = {{0, 1, 2}, {3}};
  const auto sol = solve_annotated(t, inst, SolverConfig{}, EnumerateMode{});
  ASSERT_TRUE(sol);
  EXPECT_TRUE(check_feasible(inst, *sol));
  EXPECT_LE(sol->size(), size_bound(2));
}

TEST(SolveAnnotated, GuidedRejectsInconsistentOracle) {
  const Instance inst = unit_instance(2, {{0}, {1}});
  AnnotatedTuple t;
  t.S = {0};
  t.X = {{1}};
  try {
    solve_annotated(t, inst, SolverConfig{}, GuidedMode{Solution::of({1}), Assignment{{1, 1}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOracleInconsistent);
  }
}

TEST(GoodTuple, EmptyS) {
  const Instance inst = unit_instance(3, {{0, 1}, {1, 2}});
  const Assignment asg{{0, 2}};
  const auto t = good_tuple_from_opt({}, {{0, 1}, {2}}, Solution::of({0, 2}), asg, inst, SolverConfig{});
  EXPECT_TRUE(t.pi.empty());
  EXPECT_EQ(t.gamma(0, {}), 1);
  EXPECT_EQ(t.gamma(1, {}), 1);
  EXPECT_EQ(t.gamma_part.size(), 2u);
}

TEST(GoodTuple, AllSetsOnOneElement) {
  const Instance inst = unit_instance(3, {{0, 1}, {0, 2}, {0}}, 3);
  const Assignment asg{{0, 0, 0}};
  const auto t = good_tuple_from_opt({0}, {{1, 2}}, Solution::of({0, 1}), asg, inst, SolverConfig{});
  for (const auto& [E, s] : t.pi) EXPECT_EQ(s, 0);
  EXPECT_EQ(t.gamma_of(0, {0}), bucket_value(3, SolverConfig{}.effective_base(2)));
  EXPECT_EQ(t.gamma(0, {0}), 0);
}

TEST(GoodTuple, Preconditions) {
  const Instance inst = unit_instance(3, {{0, 1}, {1, 2}});
  const Assignment asg{{0, 2}};
  EXPECT_THROW(good_tuple_from_opt({1}, {{0, 2}}, Solution::of({0, 2}), asg, inst, SolverConfig{}), Error);
  EXPECT_THROW(good_tuple_from_opt({}, {{0, 2}}, Solution::of({0, 2}), asg, inst, SolverConfig{}), Error);
}

TEST(GoodTuple, ClausesAndFilterSafetyOnCorpus) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Instance raw = generate_instance(oracle::corpus_params(), seed);
    const auto opt = solve_exact(raw, 3);
    if (!opt) continue;
    const ExpandedInstance ex = expand_multiplicities(raw, 3);
    // Lift the optimum onto copies.
    Solution lifted;
    Assignment asg;
    std::map<ElementId, std::int64_t> used;
    for (const auto& [x, c] : opt->sol.copies) {
      for (std::int64_t j = 0; j < c; ++j) lifted.copies[ex.copies_of.at(x)[static_cast<std::size_t>(j)]] = 1;
    }
    for (SetIndex i = 0; i < raw.m(); ++i) {
      const ElementId x = opt->asg.target[i];
      asg.target.push_back(ex.copies_of.at(x)[static_cast<std::size_t>(used[x]++ / raw.element(x).cap)]);
    }
    ASSERT_TRUE(is_valid_assignment(ex.inst, lifted, asg));
    const auto support = lifted.support();
    // S = first opt element, one part per remaining opt element plus noise.
    const Subset S{support.front()};
    Parts X(support.size() - 1);
    for (ElementId x : ex.inst.sorted_ids()) {
      if (x == support.front()) continue;
      const auto it = std::find(support.begin(), support.end(), x);
      if (it != support.end()) {
        X[static_cast<std::size_t>(it - support.begin()) - 1].push_back(x);
      } else if (!X.empty()) {
        X[static_cast<std::size_t>(x) % X.size()].push_back(x);
      }
    }
    for (auto& part : X) std::sort(part.begin(), part.end());
    const SolverConfig cfg;
    const auto t = good_tuple_from_opt(S, X, lifted, asg, ex.inst, cfg);
    expect_good_tuple(t, lifted, asg, ex.inst, cfg);
    const InfoTuple info = info_tuple(t, ex.inst, cfg);
    for (std::size_t i = 0; i < X.size(); ++i) {
      bool kept = false;
      for (ElementId x : info.Xp[i]) kept = kept || lifted.count(x) > 0;
      EXPECT_TRUE(kept) << "seed " << seed << " part " << i;
    }
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(ExpandMultiplicities, ClampsCopies) {
  const Instance inst(1, {{0, 2, 5, 3}}, {{0}});
  const auto ex = expand_multiplicities(inst, 2);
  EXPECT_EQ(ex.inst.n(), 2u);
  EXPECT_EQ(ex.back, (std::vector<ElementId>{0, 0}));
  EXPECT_EQ(ex.inst.family()[0], (Subset{0, 1}));
  EXPECT_EQ(ex.inst.element(1).cap, 2);
  EXPECT_EQ(ex.inst.element(1).weight, 3);
}

TEST(ExpandMultiplicities, UnitMultiplicityIsIsomorphic) {
  const Instance inst = generate_instance(oracle::corpus_params(), 3);
  GenParams p = oracle::corpus_params();
  p.mult_range = {1, 1};
  const Instance unit = generate_instance(p, 3);
  const auto ex = expand_multiplicities(unit, 3);
  EXPECT_EQ(ex.inst.family(), unit.family());
  (void)inst;
}

TEST(ExpandMultiplicities, ContractsToOriginalShape) {
  const Instance inst(2, {{0, 1, 2, 1}, {1, 1, std::nullopt, 1}, {2, 1, 1, 1}}, {{0, 1}, {1, 2}, {2}});
  const auto ex = expand_multiplicities(inst, 3);
  EXPECT_EQ(ex.inst.n(), 2u + 3u + 1u);
  for (SetIndex i = 0; i < inst.m(); ++i) {
    std::set<ElementId> back;
    for (ElementId x : ex.inst.family()[i]) back.insert(ex.back[static_cast<std::size_t>(x)]);
    EXPECT_EQ(Subset(back.begin(), back.end()), inst.family()[i]);
  }
}

TEST(SolveApprox, SingleElement) {
  const Instance inst = unit_instance(3, {{1}, {1, 2}}, 2);
  for (const ApproxMode& mode : {ApproxMode{EnumerateMode{}}, ApproxMode{GuidedMode{Solution::of({1}), Assignment{{1, 1}}}}}) {
    const auto res = solve_approx(inst, 1, SolverConfig{}, mode);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->sol, Solution::of({1}));
  }
}

TEST(SolveApprox, InfeasibleGivesNothing) {
  const Instance inst = unit_instance(1, {{0}, {0}, {0}});
  EXPECT_FALSE(solve_approx(inst, 2, SolverConfig{}, EnumerateMode{}));
}

TEST(SolveApprox, GuidedOnCorpus) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Instance inst = generate_instance(oracle::corpus_params(), seed);
    for (std::int64_t k = 2; k <= 3; ++k) {
      const auto opt = solve_exact_weighted(inst, k);
      if (!opt) continue;
      SolverConfig cfg;
      cfg.seed = seed;
      const auto res = solve_approx(inst, k, cfg, GuidedMode{opt->sol, opt->asg});
      ASSERT_TRUE(res) << "seed " << seed;
      EXPECT_TRUE(oracle::feasible_by_matching(inst, res->sol));
      EXPECT_LE(res->size, size_bound(k));
      EXPECT_LE(2 * res->weight, 5 * opt->weight);
    }
  }
}

TEST(SolveApprox, EnumerateOnMicroInstances) {
  GenParams p;
  p.n = 4;
  p.m = 4;
  p.d = 2;
  p.cap_range = {1, 3};
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = generate_instance(p, seed);
    const auto opt = solve_exact(inst, 2);
    SolverConfig cfg;
    cfg.seed = seed;
    const auto res = solve_approx(inst, 2, cfg, EnumerateMode{});
    if (res) {
      EXPECT_TRUE(oracle::feasible_by_matching(inst, res->sol));
      EXPECT_LE(res->size, size_bound(2));
      ++solved;
    } else {
      EXPECT_FALSE(opt) << "seed " << seed;
    }
  }
  EXPECT_GT(solved, 0);
}

TEST(SolveApprox, GuidedNeedsSeparatingColoring) {
  const Instance inst = unit_instance(3, {{0}, {1}});
  SolverConfig cfg;
  cfg.color_trials = 1;
  cfg.seed = 0;
  // With one trial some seeds fail to separate {0, 1}; find one and check the error kind.
  bool saw = false;
  for (std::uint64_t s = 0; s < 20 && !saw; ++s) {
    cfg.seed = s;
    try {
      solve_approx(inst, 2, cfg, GuidedMode{Solution::of({0, 1}), Assignment{{0, 1}}});
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kNoColoringSeparates);
      saw = true;
    }
  }
  EXPECT_TRUE(saw);
}
