#pragma once

// The 4/3-approximation pipeline: coverage buckets, annotated tuples and
// their information tuples, candidate sets, the extended-tuple solver, the
// recursive annotated solver (enumerating or oracle-guided) and the driver.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "caphs/colorweights.hpp"
#include "caphs/core.hpp"
#include "caphs/domset.hpp"
#include "caphs/feasibility.hpp"
#include "caphs/independence.hpp"
#include "caphs/rational.hpp"

namespace caphs {

using Parts = std::vector<std::vector<ElementId>>;

namespace detail {

inline std::int64_t saturating_mul(std::int64_t a, std::int64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::int64_t>::max() / b) return std::numeric_limits<std::int64_t>::max();
  return a * b;
}

inline std::int64_t saturating_pow(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out = saturating_mul(out, base);
  return out;
}

}  // namespace detail

/// Tunables. Unset optionals take their k-dependent defaults.
struct SolverConfig {
  std::optional<Rational> rho;                      // 1/k^4
  std::optional<std::int64_t> top_t;                // d * k^10
  std::optional<std::int64_t> small_class_threshold;  // d * k^11
  std::optional<Rational> bucket_base;              // 1 + 1/(3k)
  std::int64_t tuple_budget = 1'000'000;
  std::int64_t recursion_budget = 1'000'000;
  std::uint64_t seed = 0;
  Rational epsilon{1, 2};
  std::optional<std::int64_t> color_trials;  // ceil(e^k k ln(n+1))
  std::int64_t max_color_trials = 10'000;

  Rational effective_rho(std::int64_t k) const {
    if (rho) return *rho;
    return Rational(1, detail::saturating_pow(std::max<std::int64_t>(k, 1), 4));
  }
  std::int64_t effective_top_t(int d, std::int64_t k) const {
    return top_t ? *top_t : detail::saturating_mul(d, detail::saturating_pow(std::max<std::int64_t>(k, 1), 10));
  }
  std::int64_t effective_threshold(int d, std::int64_t k) const {
    return small_class_threshold ? *small_class_threshold
                                 : detail::saturating_mul(d, detail::saturating_pow(std::max<std::int64_t>(k, 1), 11));
  }
  Rational effective_base(std::int64_t k) const {
    if (bucket_base) return *bucket_base;
    const std::int64_t kk = std::max<std::int64_t>(k, 1);
    return Rational(3 * kk + 1, 3 * kk);
  }
  std::int64_t effective_color_trials(std::int64_t k, std::int64_t n) const {
    return color_trials ? *color_trials : default_color_trials(k, n, max_color_trials);
  }

  void validate() const {
    if (rho && (rho->num <= 0 || *rho > Rational(1))) throw Error(ErrorKind::kParameterViolation, "rho must lie in (0, 1]");
    if (bucket_base && *bucket_base <= Rational(1)) throw Error(ErrorKind::kParameterViolation, "bucket_base must exceed 1");
    if (top_t && *top_t < 1) throw Error(ErrorKind::kParameterViolation, "top_t must be positive");
    if (small_class_threshold && *small_class_threshold < 0) {
      throw Error(ErrorKind::kParameterViolation, "small_class_threshold must be nonnegative");
    }
    if (tuple_budget < 0 || recursion_budget < 0) throw Error(ErrorKind::kParameterViolation, "budgets must be nonnegative");
    if (epsilon.num <= 0) throw Error(ErrorKind::kParameterViolation, "epsilon must be positive");
    if (color_trials && *color_trials < 1) throw Error(ErrorKind::kParameterViolation, "color_trials must be positive");
    if (max_color_trials < 1) throw Error(ErrorKind::kParameterViolation, "max_color_trials must be positive");
  }
};

/// The values ceil(base^p), p = 0, 1, ..., computed exactly and extended on
/// demand. bucket(c) is ceil(base^p) for the largest p with base^p <= c;
/// since c is an integer, base^p <= c iff ceil(base^p) <= c.
class BucketScale {
 public:
  explicit BucketScale(Rational base) : base_(base), num_pow_(1), den_pow_(1) {
    if (base <= Rational(1)) throw Error(ErrorKind::kParameterViolation, "bucket base must exceed 1");
    ceil_.push_back(1);
  }

  const Rational& base() const { return base_; }

  std::int64_t exponent(std::int64_t c) {
    if (c < 1) throw Error(ErrorKind::kPreconditionViolated, "bucket argument must be >= 1");
    extend_past(c);
    const auto it = std::upper_bound(ceil_.begin(), ceil_.end(), c);
    return static_cast<std::int64_t>(it - ceil_.begin()) - 1;
  }

  std::int64_t value(std::int64_t c) { return ceil_[static_cast<std::size_t>(exponent(c))]; }

  /// ceil(base^p); extends the table as needed.
  std::int64_t power_ceil(std::int64_t p) {
    while (static_cast<std::int64_t>(ceil_.size()) <= p) push_next();
    return ceil_[static_cast<std::size_t>(p)];
  }

  /// Distinct bucket values <= c, ascending.
  std::vector<std::int64_t> values_up_to(std::int64_t c) {
    std::vector<std::int64_t> out;
    if (c < 1) return out;
    extend_past(c);
    for (std::int64_t v : ceil_) {
      if (v > c) break;
      if (out.empty() || out.back() != v) out.push_back(v);
    }
    return out;
  }

 private:
  void extend_past(std::int64_t c) {
    while (ceil_.back() <= c) push_next();
  }

  void push_next() {
    using boost::multiprecision::cpp_int;
    num_pow_ *= base_.num;
    den_pow_ *= base_.den;
    cpp_int q = num_pow_ / den_pow_;
    if (q * den_pow_ != num_pow_) q += 1;
    const cpp_int limit = std::numeric_limits<std::int64_t>::max();
    ceil_.push_back(q > limit ? std::numeric_limits<std::int64_t>::max() : q.convert_to<std::int64_t>());
  }

  Rational base_;
  boost::multiprecision::cpp_int num_pow_;
  boost::multiprecision::cpp_int den_pow_;
  std::vector<std::int64_t> ceil_;
};

/// Largest p with base^p <= c.
inline std::int64_t bucket_exponent(std::int64_t c, Rational base) { return BucketScale(base).exponent(c); }

/// ceil(base^p) for p = bucket_exponent(c, base).
inline std::int64_t bucket_value(std::int64_t c, Rational base) { return BucketScale(base).value(c); }

struct AnnotatedTuple {
  Subset S;
  /// X_1..X_{k-|S|}, each sorted by id.
  Parts X;
  Plurality pi;
  /// gamma(i, E) for parts; absent entries read as 0.
  std::map<std::pair<std::size_t, Subset>, std::int64_t> gamma_part;
  /// gamma(s, E) for s in S; absent entries read as 0.
  std::map<std::pair<ElementId, Subset>, std::int64_t> gamma_elem;

  std::int64_t k() const { return static_cast<std::int64_t>(S.size() + X.size()); }

  std::int64_t gamma(std::size_t i, const Subset& E) const {
    auto it = gamma_part.find({i, E});
    return it == gamma_part.end() ? 0 : it->second;
  }

  std::int64_t gamma_of(ElementId s, const Subset& E) const {
    auto it = gamma_elem.find({s, E});
    return it == gamma_elem.end() ? 0 : it->second;
  }

  /// gamma(i, s) = sum of gamma(i, E) over the classes pi credits to s.
  std::int64_t gamma_star(std::size_t i, ElementId s) const {
    std::int64_t total = 0;
    for (const auto& [E, owner] : pi) {
      if (owner == s) total += gamma(i, E);
    }
    return total;
  }
};

struct InfoTuple {
  Parts Xp;
  std::map<std::pair<ElementId, Subset>, std::int64_t> n_of;
  std::map<std::pair<ElementId, ElementId>, std::int64_t> score;

  std::int64_t score_of(ElementId v, ElementId s) const {
    auto it = score.find({v, s});
    return it == score.end() ? 0 : it->second;
  }
};

struct ExtendedTuple {
  AnnotatedTuple base;
  std::map<ElementId, std::size_t> tau1;
  std::map<ElementId, std::size_t> tau2;
};

enum class FailureReason { kNone, kTauClash, kNoDominator, kIndependenceFail, kInfeasibleOrTooBig };

inline const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::kNone: return "None";
    case FailureReason::kTauClash: return "TauClash";
    case FailureReason::kNoDominator: return "NoDominator";
    case FailureReason::kIndependenceFail: return "IndependenceFail";
    case FailureReason::kInfeasibleOrTooBig: return "InfeasibleOrTooBig";
  }
  return "?";
}

struct ExtendedResult {
  std::optional<Solution> sol;
  FailureReason reason = FailureReason::kNone;
};

/// ceil(4k/3)
inline std::int64_t size_bound(std::int64_t k) { return (4 * k + 2) / 3; }

namespace detail {

/// |A_E (.) v| for every v in X and every present class E.
inline std::map<ElementId, std::map<Subset, std::int64_t>> class_incidence(const Instance& inst,
                                                                           const EquivalenceClasses& classes,
                                                                           const Parts& X) {
  std::set<ElementId> wanted;
  for (const auto& part : X) wanted.insert(part.begin(), part.end());
  std::map<ElementId, std::map<Subset, std::int64_t>> out;
  for (const auto& [E, indices] : classes.by_class) {
    for (SetIndex i : indices) {
      for (ElementId v : inst.family()[i]) {
        if (wanted.count(v)) ++out[v][E];
      }
    }
  }
  return out;
}

inline std::int64_t lookup(const std::map<ElementId, std::map<Subset, std::int64_t>>& inc, ElementId v,
                           const Subset& E) {
  auto it = inc.find(v);
  if (it == inc.end()) return 0;
  auto jt = it->second.find(E);
  return jt == it->second.end() ? 0 : jt->second;
}

inline std::int64_t ceil_mul(const Rational& q, std::int64_t x) {
  const __int128 p = static_cast<__int128>(q.num) * x;
  __int128 r = p / q.den;
  if (r * q.den < p) ++r;
  return static_cast<std::int64_t>(r);
}

}  // namespace detail

inline InfoTuple info_tuple(const AnnotatedTuple& t, const Instance& inst, const SolverConfig& cfg) {
  const EquivalenceClasses classes = equivalence_classes(inst, t.S);
  const auto inc = detail::class_incidence(inst, classes, t.X);
  const Rational base = cfg.effective_base(t.k());
  InfoTuple info;
  info.Xp.resize(t.X.size());
  for (std::size_t i = 0; i < t.X.size(); ++i) {
    std::map<ElementId, std::int64_t> gstar;
    std::int64_t gsum = 0;
    for (ElementId s : t.S) {
      gstar[s] = t.gamma_star(i, s);
      gsum += gstar[s];
    }
    for (ElementId v : t.X[i]) {
      const std::int64_t cap = inst.element(v).cap;
      if (cap < gsum) continue;
      bool ok = true;
      for (const auto& [E, indices] : classes.by_class) {
        if (detail::lookup(inc, v, E) < t.gamma(i, E)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      info.Xp[i].push_back(v);
      std::map<ElementId, std::int64_t> nstar;
      for (const auto& [E, indices] : classes.by_class) {
        const std::int64_t nv = std::min(detail::ceil_mul(base, t.gamma(i, E)), detail::lookup(inc, v, E));
        info.n_of[{v, E}] = nv;
        if (auto p = t.pi.find(E); p != t.pi.end()) nstar[p->second] += nv;
      }
      for (ElementId s : t.S) {
        const std::int64_t spare = cap - (gsum - gstar[s]);
        info.score[{v, s}] = std::max<std::int64_t>(0, std::min(nstar[s], spare));
      }
    }
  }
  return info;
}

/// X''_i: all of X'_i when small, else the union over s in tau1^{-1}(i) of the
/// top_t elements of X'_i by score(., s) (ties to smaller ids).
inline Parts candidate_set(const ExtendedTuple& e, const InfoTuple& info, const Instance& inst,
                           const SolverConfig& cfg) {
  const std::int64_t k = e.base.k();
  const std::int64_t threshold = cfg.effective_threshold(inst.d(), k);
  const std::int64_t top = cfg.effective_top_t(inst.d(), k);
  Parts out(info.Xp.size());
  for (std::size_t i = 0; i < info.Xp.size(); ++i) {
    const auto& xp = info.Xp[i];
    if (static_cast<std::int64_t>(xp.size()) <= threshold) {
      out[i] = xp;
      continue;
    }
    std::set<ElementId> chosen;
    for (const auto& [s, part] : e.tau1) {
      if (part != i) continue;
      std::vector<ElementId> order = xp;
      std::stable_sort(order.begin(), order.end(), [&](ElementId a, ElementId b) {
        const std::int64_t sa = info.score_of(a, s);
        const std::int64_t sb = info.score_of(b, s);
        if (sa != sb) return sa > sb;
        return a < b;
      });
      const auto take = static_cast<std::size_t>(std::min<std::int64_t>(top, static_cast<std::int64_t>(order.size())));
      chosen.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    }
    out[i].assign(chosen.begin(), chosen.end());
  }
  return out;
}

/// Parts that must take two elements: a minimum set of parts meeting
/// {tau1(s), tau2(s)} for every s and containing every part that is tau1 of
/// two or more stars. Past kMaxExactReds parts, the forced parts plus all
/// tau1 images.
inline std::optional<std::vector<std::int64_t>> tau_dominator(const Subset& S, const std::map<ElementId, std::size_t>& tau1,
                                                              const std::map<ElementId, std::size_t>& tau2, std::size_t r) {
  BipartiteGraph h;
  for (std::size_t i = 0; i < r; ++i) h.reds.push_back(static_cast<std::int64_t>(i));
  std::map<std::size_t, int> tau1_load;
  for (ElementId s : S) {
    h.blues.push_back(s);
    h.adj[s] = {static_cast<std::int64_t>(tau1.at(s)), static_cast<std::int64_t>(tau2.at(s))};
    ++tau1_load[tau1.at(s)];
  }
  std::vector<std::int64_t> forced;
  for (const auto& [i, load] : tau1_load) {
    if (load >= 2) forced.push_back(static_cast<std::int64_t>(i));
  }
  if (r <= kMaxExactReds) return min_dominator_forced(h, forced);
  std::set<std::int64_t> all(forced.begin(), forced.end());
  for (ElementId s : S) all.insert(static_cast<std::int64_t>(tau1.at(s)));
  return std::vector<std::int64_t>(all.begin(), all.end());
}

/// Steps: reject clashing tau; dominate S in the tau graph with the forced
/// parts; pick an independent R from the candidate set (2 from dominator
/// parts, 1 elsewhere); accept S + R only if flow-feasible and small enough.
inline ExtendedResult solve_extended(const ExtendedTuple& e, const Instance& inst, const SolverConfig& cfg) {
  const AnnotatedTuple& t = e.base;
  const std::size_t r = t.X.size();
  const std::int64_t k = t.k();
  ExtendedResult result;
  auto finish = [&](std::vector<ElementId> ids) {
    Solution sol = Solution::of(ids);
    if (sol.size() > size_bound(k) || !check_feasible(inst, sol)) {
      result.reason = FailureReason::kInfeasibleOrTooBig;
    } else {
      result.sol = std::move(sol);
    }
    return result;
  };
  if (r == 0) return finish(t.S);

  for (ElementId s : t.S) {
    auto a = e.tau1.find(s);
    auto b = e.tau2.find(s);
    if (a == e.tau1.end() || b == e.tau2.end() || a->second >= r || b->second >= r) {
      throw Error(ErrorKind::kPreconditionViolated, "tau must map every s in S to a part");
    }
    if (a->second == b->second) {
      result.reason = FailureReason::kTauClash;
      return result;
    }
  }

  const auto D = tau_dominator(t.S, e.tau1, e.tau2, r);
  if (!D) {
    result.reason = FailureReason::kNoDominator;
    return result;
  }

  const InfoTuple info = info_tuple(t, inst, cfg);
  const Parts candidates = candidate_set(e, info, inst, cfg);
  IndependenceContext ctx;
  ctx.S = t.S;
  ctx.stars = stars(equivalence_classes(inst, t.S), t.pi);
  ctx.rho = cfg.effective_rho(k);
  std::vector<int> quotas(r, 1);
  for (std::int64_t i : *D) quotas[static_cast<std::size_t>(i)] = 2;
  auto R = find_independent_set(ctx, candidates, quotas, inst);
  if (!R) {
    result.reason = FailureReason::kIndependenceFail;
    return result;
  }
  std::vector<ElementId> ids = t.S;
  ids.insert(ids.end(), R->begin(), R->end());
  return finish(std::move(ids));
}

/// Oracle-built tuple: gamma is the bucketed coverage of asg, pi credits each
/// class to its heaviest coverer in S (ties to the smaller id).
inline AnnotatedTuple good_tuple_from_opt(const Subset& S, const Parts& X, const Solution& opt, const Assignment& asg,
                                          const Instance& inst, const SolverConfig& cfg) {
  AnnotatedTuple t;
  t.S = make_subset(S);
  t.X = X;
  for (auto& part : t.X) std::sort(part.begin(), part.end());
  const std::vector<ElementId> support = opt.support();
  auto in_opt = [&](ElementId x) { return std::binary_search(support.begin(), support.end(), x); };
  for (ElementId s : t.S) {
    if (!in_opt(s)) throw Error(ErrorKind::kPreconditionViolated, "S must be contained in the optimum");
  }
  std::vector<ElementId> rep;
  for (const auto& part : t.X) {
    std::vector<ElementId> hits;
    for (ElementId x : part) {
      if (Instance::set_contains(t.S, x)) throw Error(ErrorKind::kPreconditionViolated, "X must avoid S");
      if (in_opt(x)) hits.push_back(x);
    }
    if (hits.size() != 1) throw Error(ErrorKind::kPreconditionViolated, "each part must hold exactly one optimum element");
    rep.push_back(hits.front());
  }
  if (asg.target.size() != inst.m()) throw Error(ErrorKind::kPreconditionViolated, "assignment size mismatch");

  BucketScale scale(cfg.effective_base(t.k()));
  auto bucket = [&](std::int64_t c) { return c == 0 ? 0 : scale.value(c); };
  const EquivalenceClasses classes = equivalence_classes(inst, t.S);
  for (const auto& [E, indices] : classes.by_class) {
    if (!t.S.empty()) {
      ElementId best = t.S.front();
      std::int64_t best_cov = -1;
      for (ElementId s : t.S) {
        const std::int64_t c = coverage(asg, s, indices);
        if (c > best_cov) {
          best = s;
          best_cov = c;
        }
      }
      t.pi[E] = best;
    }
    for (std::size_t i = 0; i < rep.size(); ++i) {
      if (const std::int64_t g = bucket(coverage(asg, rep[i], indices))) t.gamma_part[{i, E}] = g;
    }
    for (ElementId s : t.S) {
      if (const std::int64_t g = bucket(coverage(asg, s, indices))) t.gamma_elem[{s, E}] = g;
    }
  }
  return t;
}

struct EnumerateMode {};
struct GuidedMode {
  Solution opt;
  Assignment asg;
};
using ApproxMode = std::variant<EnumerateMode, GuidedMode>;

namespace detail {

inline Parts without_part(const Parts& X, std::size_t i) {
  Parts out;
  for (std::size_t j = 0; j < X.size(); ++j) {
    if (j != i) out.push_back(X[j]);
  }
  return out;
}

/// Odometer over choice lists; visit returns true to stop. Returns whether
/// some visit stopped the walk.
inline bool for_each_choice(const std::vector<std::size_t>& radix, const std::function<bool(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> pos(radix.size(), 0);
  for (std::size_t r : radix) {
    if (r == 0) return false;
  }
  while (true) {
    if (visit(pos)) return true;
    std::size_t j = radix.size();
    while (j > 0) {
      --j;
      if (++pos[j] < radix[j]) break;
      pos[j] = 0;
      if (j == 0) return false;
    }
    if (radix.empty()) return false;
  }
}

/// Walks tuples of F_{S,X}: pi over present classes with pi(E) in E + {min S}
/// (the only values a coverage argmax can take), then gamma(i, E) over
/// {0} + bucket values up to |A_E|. gamma(s, E) is left 0; nothing reads it.
inline bool walk_tuples(const Subset& S, const Parts& X, const Instance& inst, const SolverConfig& cfg,
                        const std::function<bool(const AnnotatedTuple&)>& visit) {
  const EquivalenceClasses classes = equivalence_classes(inst, S);
  const std::int64_t k = static_cast<std::int64_t>(S.size() + X.size());
  BucketScale scale(cfg.effective_base(k));
  std::vector<Subset> pi_classes;
  std::vector<std::vector<ElementId>> pi_options;
  if (!classes.S.empty()) {
    for (const auto& [E, indices] : classes.by_class) {
      pi_classes.push_back(E);
      pi_options.push_back(make_subset([&] {
        std::vector<ElementId> o = E;
        o.push_back(classes.S.front());
        return o;
      }()));
    }
  }
  std::vector<std::pair<std::size_t, Subset>> gamma_keys;
  std::vector<std::vector<std::int64_t>> gamma_options;
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (const auto& [E, indices] : classes.by_class) {
      gamma_keys.push_back({i, E});
      std::vector<std::int64_t> o{0};
      for (std::int64_t v : scale.values_up_to(static_cast<std::int64_t>(indices.size()))) o.push_back(v);
      gamma_options.push_back(std::move(o));
    }
  }
  std::vector<std::size_t> radix;
  for (const auto& o : pi_options) radix.push_back(o.size());
  for (const auto& o : gamma_options) radix.push_back(o.size());
  return for_each_choice(radix, [&](const std::vector<std::size_t>& pos) {
    AnnotatedTuple t;
    t.S = classes.S;
    t.X = X;
    std::size_t j = 0;
    for (; j < pi_classes.size(); ++j) t.pi[pi_classes[j]] = pi_options[j][pos[j]];
    for (std::size_t g = 0; g < gamma_keys.size(); ++g, ++j) {
      if (const std::int64_t v = gamma_options[g][pos[j]]) t.gamma_part[gamma_keys[g]] = v;
    }
    return visit(t);
  });
}

/// All functions S -> [r] in lexicographic order (by ascending s).
inline bool for_each_tau(const Subset& S, std::size_t r, const std::function<bool(const std::map<ElementId, std::size_t>&)>& visit) {
  std::vector<std::size_t> radix(S.size(), r);
  return for_each_choice(radix, [&](const std::vector<std::size_t>& pos) {
    std::map<ElementId, std::size_t> tau;
    for (std::size_t j = 0; j < S.size(); ++j) tau[S[j]] = pos[j];
    return visit(tau);
  });
}

class Searcher {
 public:
  Searcher(const Instance& inst, const SolverConfig& cfg, const GuidedMode* guided)
      : inst_(inst), cfg_(cfg), guided_(guided), tuples_left_(cfg.tuple_budget), calls_left_(cfg.recursion_budget) {
    cfg_.validate();
  }

  std::optional<Solution> annotated(const AnnotatedTuple& t) {
    spend(calls_left_, "recursion");
    return guided_ ? annotated_guided(t) : annotated_enumerate(t);
  }

  /// First success over every tuple of F_{S,X}; memoized on (S, X).
  std::optional<Solution> over_tuples(const Subset& S, const Parts& X) {
    auto key = std::make_pair(S, X);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::optional<Solution> found;
    walk_tuples(S, X, inst_, cfg_, [&](const AnnotatedTuple& t) {
      spend(tuples_left_, "tuple");
      found = annotated(t);
      return found.has_value();
    });
    memo_[key] = found;
    return found;
  }

 private:
  void spend(std::int64_t& left, const char* what) {
    if (left <= 0) throw Error(ErrorKind::kBudgetExceeded, std::string(what) + " budget exhausted");
    --left;
  }

  std::optional<Solution> base_case(const AnnotatedTuple& t) {
    Solution sol = Solution::of(t.S);
    if (check_feasible(inst_, sol)) return sol;
    return std::nullopt;
  }

  std::optional<Solution> annotated_enumerate(const AnnotatedTuple& t) {
    if (t.X.empty()) return base_case(t);
    const std::size_t r = t.X.size();
    const InfoTuple info = info_tuple(t, inst_, cfg_);
    std::set<std::pair<std::size_t, ElementId>> tried;
    std::optional<Solution> found;
    for_each_tau(t.S, r, [&](const std::map<ElementId, std::size_t>& tau1) {
      ExtendedTuple e{t, tau1, tau1};
      const Parts cand = candidate_set(e, info, inst_, cfg_);
      for (std::size_t i = 0; i < r && !found; ++i) {
        for (ElementId v : cand[i]) {
          if (!tried.insert({i, v}).second) continue;
          Subset next = t.S;
          next.push_back(v);
          found = over_tuples(make_subset(next), without_part(t.X, i));
          if (found) break;
        }
      }
      if (found) return true;
      return for_each_tau(t.S, r, [&](const std::map<ElementId, std::size_t>& tau2) {
        for (const auto& [s, i] : tau1) {
          if (tau2.at(s) == i) return false;
        }
        spend(tuples_left_, "tuple");
        e.tau2 = tau2;
        found = solve_extended(e, inst_, cfg_).sol;
        return found.has_value();
      });
    });
    return found;
  }

  std::optional<Solution> annotated_guided(const AnnotatedTuple& t) {
    const Solution& opt = guided_->opt;
    const Assignment& asg = guided_->asg;
    for (ElementId s : t.S) {
      if (opt.count(s) == 0) throw Error(ErrorKind::kOracleInconsistent, "optimum does not contain S");
    }
    if (t.X.empty()) return base_case(t);
    const std::size_t r = t.X.size();
    std::vector<ElementId> rep;
    for (const auto& part : t.X) {
      std::vector<ElementId> hits;
      for (ElementId x : part) {
        if (opt.count(x) > 0) hits.push_back(x);
      }
      if (hits.size() != 1) throw Error(ErrorKind::kOracleInconsistent, "a part does not isolate one optimum element");
      rep.push_back(hits.front());
    }
    // tau1(s): the part whose representative covers most of A_s; tau2: runner-up.
    const auto star_sets = stars(equivalence_classes(inst_, t.S), t.pi);
    ExtendedTuple e{t, {}, {}};
    for (const auto& [s, indices] : star_sets) {
      std::vector<std::int64_t> cov(r);
      for (std::size_t i = 0; i < r; ++i) cov[i] = coverage(asg, rep[i], indices);
      std::size_t first = 0;
      for (std::size_t i = 1; i < r; ++i) {
        if (cov[i] > cov[first]) first = i;
      }
      std::optional<std::size_t> second;
      for (std::size_t i = 0; i < r; ++i) {
        if (i != first && (!second || cov[i] > cov[*second])) second = i;
      }
      e.tau1[s] = first;
      e.tau2[s] = second.value_or(first);
    }
    const InfoTuple info = info_tuple(t, inst_, cfg_);
    const Parts cand = candidate_set(e, info, inst_, cfg_);
    for (std::size_t i = 0; i < r; ++i) {
      if (!std::binary_search(cand[i].begin(), cand[i].end(), rep[i])) continue;
      Subset next = t.S;
      next.push_back(rep[i]);
      const AnnotatedTuple child =
          good_tuple_from_opt(make_subset(next), without_part(t.X, i), opt, asg, inst_, cfg_);
      if (auto found = annotated(child)) return found;
      break;
    }
    return solve_extended(e, inst_, cfg_).sol;
  }

  const Instance& inst_;
  SolverConfig cfg_;
  const GuidedMode* guided_;
  std::int64_t tuples_left_;
  std::int64_t calls_left_;
  std::map<std::pair<Subset, Parts>, std::optional<Solution>> memo_;
};

}  // namespace detail

/// Calls visit on every tuple of F_{S,X} in enumeration order until it
/// returns true.
inline void for_each_annotated_tuple(const Subset& S, const Parts& X, const Instance& inst, const SolverConfig& cfg,
                                     const std::function<bool(const AnnotatedTuple&)>& visit) {
  detail::walk_tuples(make_subset(S), X, inst, cfg, visit);
}

/// Returns a flow-feasible solution of size <= ceil(4k/3) with at most two
/// elements in each part, or nothing. Guided mode follows the oracle pair
/// instead of enumerating guesses.
inline std::optional<Solution> solve_annotated(const AnnotatedTuple& t, const Instance& inst, const SolverConfig& cfg,
                                               const ApproxMode& mode) {
  const GuidedMode* guided = std::get_if<GuidedMode>(&mode);
  detail::Searcher searcher(inst, cfg, guided);
  return searcher.annotated(t);
}

struct ExpandedInstance {
  Instance inst;
  /// back[new id] = original id
  std::vector<ElementId> back;
  /// original id -> its copies, ascending
  std::map<ElementId, std::vector<ElementId>> copies_of;
};

/// Each element becomes min(k, M) unit-multiplicity copies with the same
/// capacity and weight; each set becomes the union of its members' copies.
/// New ids are 0..n'-1 in order of original id. d' = max(d, largest set).
inline ExpandedInstance expand_multiplicities(const Instance& inst, std::int64_t k) {
  if (k < 1) throw Error(ErrorKind::kParameterViolation, "k must be positive");
  ExpandedInstance out;
  std::vector<Element> elements;
  for (ElementId x : inst.sorted_ids()) {
    const Element& e = inst.element(x);
    for (std::int64_t c = 0; c < e.clamped_mult(k); ++c) {
      const auto id = static_cast<ElementId>(out.back.size());
      elements.push_back(Element{id, e.cap, 1, e.weight});
      out.back.push_back(x);
      out.copies_of[x].push_back(id);
    }
  }
  std::vector<Subset> family;
  int d = inst.d();
  for (const Subset& set : inst.family()) {
    Subset expanded;
    for (ElementId x : set) {
      const auto& cs = out.copies_of[x];
      expanded.insert(expanded.end(), cs.begin(), cs.end());
    }
    std::sort(expanded.begin(), expanded.end());
    d = std::max(d, static_cast<int>(expanded.size()));
    family.push_back(std::move(expanded));
  }
  out.inst = Instance(d, std::move(elements), std::move(family));
  return out;
}

struct ApproxResult {
  Solution sol;
  Assignment asg;
  std::int64_t weight = 0;
  std::int64_t size = 0;
};

namespace detail {

/// delta = max(1, ceil(eps * W / (ell * max(1, ceil(log2 n')))))
inline std::int64_t weight_window(const Rational& eps, std::int64_t W, std::int64_t ell, std::int64_t n_prime) {
  std::int64_t log_n = 0;
  while ((std::int64_t{1} << log_n) < n_prime) ++log_n;
  const __int128 den = static_cast<__int128>(eps.den) * ell * std::max<std::int64_t>(1, log_n);
  const __int128 num = static_cast<__int128>(eps.num) * W;
  const __int128 q = (num + den - 1) / den;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(q));
}

inline Parts weight_filter(const Coloring& coloring, const std::vector<std::int64_t>& bucket, std::int64_t delta,
                           const Instance& inst) {
  Parts out(coloring.size());
  for (std::size_t i = 0; i < coloring.size(); ++i) {
    const std::int64_t lo = bucket[i] * delta;
    for (ElementId x : coloring[i]) {
      const std::int64_t w = inst.element(x).weight;
      if (lo <= w && w <= lo + delta) out[i].push_back(x);
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

inline ApproxResult contract(const Instance& inst, const ExpandedInstance& ex, const Solution& expanded_sol) {
  Solution sol;
  for (const auto& [x, c] : expanded_sol.copies) sol.copies[ex.back[static_cast<std::size_t>(x)]] += c;
  auto asg = check_feasible(inst, sol);
  if (!asg) throw std::logic_error("contracted solution lost feasibility");
  return ApproxResult{sol, *asg, sol.weight(inst), sol.size()};
}

}  // namespace detail

/// Driver: expand multiplicities, sweep weight estimates, colorings and
/// per-part weight windows, and run the annotated solver from the root.
/// Enumerate mode tries ell = 1..k; guided mode uses ell = |opt|.
inline std::optional<ApproxResult> solve_approx(const Instance& inst, std::int64_t k, const SolverConfig& cfg,
                                                const ApproxMode& mode) {
  cfg.validate();
  if (k < 0) throw Error(ErrorKind::kParameterViolation, "k must be nonnegative");
  if (inst.m() == 0) return ApproxResult{{}, {}, 0, 0};
  if (k == 0) return std::nullopt;
  const ExpandedInstance ex = expand_multiplicities(inst, k);
  const std::vector<ElementId> ids = ex.inst.sorted_ids();
  const auto n_prime = static_cast<std::int64_t>(ids.size());

  if (const auto* guided = std::get_if<GuidedMode>(&mode)) {
    const Solution& opt = guided->opt;
    for (const auto& [x, c] : opt.copies) {
      if (!inst.contains(x) || c < 1 || c > inst.element(x).clamped_mult(k)) {
        throw Error(ErrorKind::kOracleInconsistent, "optimum is not a valid multiset for this k");
      }
    }
    if (!is_valid_assignment(inst, opt, guided->asg)) {
      throw Error(ErrorKind::kOracleInconsistent, "optimum assignment is invalid");
    }
    const std::int64_t ell = opt.size();
    if (ell < 1 || ell > k) throw Error(ErrorKind::kOracleInconsistent, "optimum size outside [1, k]");

    // Copies of x take the sets assigned to x in order, cap at a time.
    GuidedMode lifted;
    lifted.asg.target.assign(inst.m(), -1);
    std::map<ElementId, std::int64_t> used;
    for (const auto& [x, c] : opt.copies) {
      for (std::int64_t j = 0; j < c; ++j) lifted.opt.copies[ex.copies_of.at(x)[static_cast<std::size_t>(j)]] = 1;
    }
    for (SetIndex i = 0; i < inst.m(); ++i) {
      const ElementId x = guided->asg.target[i];
      const std::int64_t cap = std::max<std::int64_t>(1, inst.element(x).cap);
      const std::int64_t slot = used[x]++ / cap;
      lifted.asg.target[i] = ex.copies_of.at(x)[static_cast<std::size_t>(slot)];
    }
    const std::vector<ElementId> lifted_ids = lifted.opt.support();

    const std::int64_t w_star = opt.weight(inst);
    std::int64_t W = 0;
    for (std::int64_t w : weight_estimates(inst, ell)) {
      if (w >= w_star) {
        W = w;
        break;
      }
    }
    const auto colorings =
        random_colorings(ids, ell, cfg.effective_color_trials(ell, n_prime), mix_seed(cfg.seed, static_cast<std::uint64_t>(ell)));
    const Coloring* good = nullptr;
    for (const auto& c : colorings) {
      if (separates(c, lifted_ids)) {
        good = &c;
        break;
      }
    }
    if (!good) throw Error(ErrorKind::kNoColoringSeparates, "no trial coloring separates the optimum");
    const std::int64_t delta = detail::weight_window(cfg.epsilon, W, ell, n_prime);
    std::vector<std::int64_t> bucket;
    for (const auto& part : *good) {
      for (ElementId x : part) {
        if (lifted.opt.count(x)) bucket.push_back(ex.inst.element(x).weight / delta);
      }
    }
    const Parts X = detail::weight_filter(*good, bucket, delta, ex.inst);
    const AnnotatedTuple root = good_tuple_from_opt({}, X, lifted.opt, lifted.asg, ex.inst, cfg);
    detail::Searcher searcher(ex.inst, cfg, &lifted);
    if (auto found = searcher.annotated(root)) return detail::contract(inst, ex, *found);
    return std::nullopt;
  }

  detail::Searcher searcher(ex.inst, cfg, nullptr);
  for (std::int64_t ell = 1; ell <= k; ++ell) {
    const auto colorings = random_colorings(ids, ell, cfg.effective_color_trials(ell, n_prime),
                                            mix_seed(cfg.seed, static_cast<std::uint64_t>(ell)));
    for (std::int64_t W : weight_estimates(inst, ell)) {
      const std::int64_t delta = detail::weight_window(cfg.epsilon, W, ell, n_prime);
      std::set<std::int64_t> levels;
      for (ElementId x : ids) levels.insert(ex.inst.element(x).weight / delta);
      const std::vector<std::int64_t> level_list(levels.begin(), levels.end());
      for (const auto& coloring : colorings) {
        std::optional<Solution> found;
        detail::for_each_choice(std::vector<std::size_t>(static_cast<std::size_t>(ell), level_list.size()),
                                [&](const std::vector<std::size_t>& pos) {
                                  std::vector<std::int64_t> bucket;
                                  for (std::size_t p : pos) bucket.push_back(level_list[p]);
                                  const Parts X = detail::weight_filter(coloring, bucket, delta, ex.inst);
                                  // An empty part can never be consumed, so no tuple over X succeeds.
                                  for (const auto& part : X) {
                                    if (part.empty()) return false;
                                  }
                                  found = searcher.over_tuples({}, X);
                                  return found.has_value();
                                });
        if (found) return detail::contract(inst, ex, *found);
      }
    }
  }
  return std::nullopt;
}

}  // namespace caphs
