#pragma once

// 2-CSP and multi-dimensional knapsack models and the hardness constructions:
// CSP -> MDK, MDK -> capacitated vertex cover (plain and weighted), universe
// covering families and the covering-family CSP -> MDK variant. Includes the
// brute-force checkers used to test them at micro scale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "caphs/core.hpp"
#include "caphs/io.hpp"
#include "caphs/rational.hpp"
#include "caphs/rng.hpp"

namespace caphs {

struct CspConstraint {
  std::int64_t u = 0;
  std::int64_t v = 0;
  /// Allowed (sigma(u), sigma(v)) pairs, values in 1..n.
  std::vector<std::pair<std::int64_t, std::int64_t>> allowed;

  bool allows(std::int64_t a, std::int64_t b) const {
    return std::find(allowed.begin(), allowed.end(), std::make_pair(a, b)) != allowed.end();
  }
};

/// Variables 0..k-1 over the alphabet 1..n. Parallel constraints are allowed.
struct CspInstance {
  std::int64_t k = 0;
  std::int64_t n = 0;
  std::vector<CspConstraint> constraints;

  void validate() const {
    if (k < 1 || n < 1) throw Error(ErrorKind::kValidationError, "csp needs k >= 1 and n >= 1");
    for (const auto& c : constraints) {
      if (c.u < 0 || c.u >= k || c.v < 0 || c.v >= k) throw Error(ErrorKind::kValidationError, "constraint names unknown variable");
      if (c.u == c.v) throw Error(ErrorKind::kValidationError, "constraint endpoints must differ");
      for (auto [a, b] : c.allowed) {
        if (a < 1 || a > n || b < 1 || b > n) throw Error(ErrorKind::kValidationError, "allowed pair outside the alphabet");
      }
    }
  }

  std::vector<std::int64_t> degrees() const {
    std::vector<std::int64_t> deg(static_cast<std::size_t>(k), 0);
    for (const auto& c : constraints) {
      ++deg[static_cast<std::size_t>(c.u)];
      ++deg[static_cast<std::size_t>(c.v)];
    }
    return deg;
  }

  bool is_three_regular() const {
    const auto deg = degrees();
    return std::all_of(deg.begin(), deg.end(), [](std::int64_t x) { return x == 3; });
  }
};

struct MdkInstance {
  std::int64_t d = 0;
  /// Solution-size parameter.
  std::int64_t k = 0;
  std::vector<std::int64_t> target;
  std::vector<std::vector<std::int64_t>> vectors;
  /// Optional names, one per dimension / per vector; empty when absent.
  std::vector<std::string> dim_labels;
  std::vector<std::string> vector_labels;

  void validate() const {
    if (d < 0) throw Error(ErrorKind::kValidationError, "negative dimension");
    if (static_cast<std::int64_t>(target.size()) != d) throw Error(ErrorKind::kValidationError, "target has wrong dimension");
    for (std::int64_t t : target) {
      if (t < 0) throw Error(ErrorKind::kValidationError, "negative target entry");
    }
    for (const auto& v : vectors) {
      if (static_cast<std::int64_t>(v.size()) != d) throw Error(ErrorKind::kValidationError, "vector has wrong dimension");
      for (std::int64_t x : v) {
        if (x < 0) throw Error(ErrorKind::kValidationError, "negative vector entry");
      }
    }
    if (!dim_labels.empty() && static_cast<std::int64_t>(dim_labels.size()) != d) {
      throw Error(ErrorKind::kValidationError, "one label per dimension");
    }
    if (!vector_labels.empty() && vector_labels.size() != vectors.size()) {
      throw Error(ErrorKind::kValidationError, "one label per vector");
    }
  }
};

// ---- JSON ----

inline CspInstance csp_from_json(const nlohmann::json& doc) {
  detail::check_format(doc);
  CspInstance csp;
  csp.k = detail::get_int(doc, "k");
  csp.n = detail::get_int(doc, "n");
  for (const auto& c : detail::get_array(doc, "constraints")) {
    if (!c.is_object()) throw Error(ErrorKind::kMalformedInput, "constraint must be an object");
    CspConstraint con;
    con.u = detail::get_int(c, "u");
    con.v = detail::get_int(c, "v");
    for (const auto& p : detail::get_array(c, "allowed")) {
      if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::kMalformedInput, "allowed entries are pairs");
      con.allowed.emplace_back(detail::as_int(p[0]), detail::as_int(p[1]));
    }
    csp.constraints.push_back(std::move(con));
  }
  csp.validate();
  return csp;
}

inline CspInstance parse_csp(std::string_view text) { return csp_from_json(detail::parse_json(text)); }

inline nlohmann::ordered_json csp_to_json(const CspInstance& csp) {
  nlohmann::ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["k"] = csp.k;
  doc["n"] = csp.n;
  doc["constraints"] = nlohmann::ordered_json::array();
  for (const auto& c : csp.constraints) {
    nlohmann::ordered_json con;
    con["u"] = c.u;
    con["v"] = c.v;
    con["allowed"] = nlohmann::ordered_json::array();
    for (auto [a, b] : c.allowed) con["allowed"].push_back({a, b});
    doc["constraints"].push_back(std::move(con));
  }
  return doc;
}

inline MdkInstance mdk_from_json(const nlohmann::json& doc) {
  detail::check_format(doc);
  MdkInstance mdk;
  mdk.d = detail::get_int(doc, "d");
  mdk.k = detail::get_int(doc, "k");
  for (const auto& t : detail::get_array(doc, "target")) mdk.target.push_back(detail::as_int(t));
  for (const auto& v : detail::get_array(doc, "vectors")) {
    if (!v.is_array()) throw Error(ErrorKind::kMalformedInput, "vectors must be arrays");
    std::vector<std::int64_t> row;
    for (const auto& x : v) row.push_back(detail::as_int(x));
    mdk.vectors.push_back(std::move(row));
  }
  if (doc.contains("labels")) {
    const auto& labels = doc.at("labels");
    if (labels.contains("dims")) labels.at("dims").get_to(mdk.dim_labels);
    if (labels.contains("vectors")) labels.at("vectors").get_to(mdk.vector_labels);
  }
  mdk.validate();
  return mdk;
}

inline MdkInstance parse_mdk(std::string_view text) { return mdk_from_json(detail::parse_json(text)); }

inline nlohmann::ordered_json mdk_to_json(const MdkInstance& mdk) {
  nlohmann::ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["d"] = mdk.d;
  doc["k"] = mdk.k;
  doc["target"] = mdk.target;
  doc["vectors"] = mdk.vectors;
  if (!mdk.dim_labels.empty() || !mdk.vector_labels.empty()) {
    doc["labels"]["dims"] = mdk.dim_labels;
    doc["labels"]["vectors"] = mdk.vector_labels;
  }
  return doc;
}

// ---- CSP ----

/// Fraction of satisfied constraints; 1 when there are none.
inline Rational csp_value(const CspInstance& csp, const std::vector<std::int64_t>& sigma) {
  if (static_cast<std::int64_t>(sigma.size()) != csp.k) {
    throw Error(ErrorKind::kPreconditionViolated, "sigma must assign every variable");
  }
  if (csp.constraints.empty()) return Rational(1);
  std::int64_t good = 0;
  for (const auto& c : csp.constraints) {
    if (c.allows(sigma[static_cast<std::size_t>(c.u)], sigma[static_cast<std::size_t>(c.v)])) ++good;
  }
  return Rational(good, static_cast<std::int64_t>(csp.constraints.size()));
}

/// Some satisfying assignment by exhaustive search, or nothing.
inline std::optional<std::vector<std::int64_t>> csp_satisfying_assignment(const CspInstance& csp) {
  std::vector<std::int64_t> sigma(static_cast<std::size_t>(csp.k), 1);
  while (true) {
    if (csp_value(csp, sigma) == Rational(1)) return sigma;
    std::size_t j = 0;
    while (j < sigma.size() && sigma[j] == csp.n) sigma[j++] = 1;
    if (j == sigma.size()) return std::nullopt;
    ++sigma[j];
  }
}

/// Random 3-regular constraint multigraph on k (even) variables via stub
/// matching without self loops. Each pair is allowed with probability
/// density; a planted assignment, when given, is always allowed.
inline CspInstance random_three_regular_csp(std::int64_t k, std::int64_t n, Rational density, std::uint64_t seed,
                                            const std::optional<std::vector<std::int64_t>>& planted = std::nullopt) {
  if (k < 2 || k % 2 != 0) throw Error(ErrorKind::kParameterViolation, "3-regular graphs need an even k >= 2");
  if (n < 1) throw Error(ErrorKind::kParameterViolation, "alphabet must be nonempty");
  Rng rng(seed);
  CspInstance csp;
  csp.k = k;
  csp.n = n;
  while (true) {
    std::vector<std::int64_t> stubs;
    for (std::int64_t x = 0; x < k; ++x) stubs.insert(stubs.end(), 3, x);
    for (std::size_t i = stubs.size(); i > 1; --i) std::swap(stubs[i - 1], stubs[rng.below(i)]);
    bool ok = true;
    for (std::size_t i = 0; i < stubs.size(); i += 2) ok = ok && stubs[i] != stubs[i + 1];
    if (!ok) continue;
    for (std::size_t i = 0; i < stubs.size(); i += 2) {
      CspConstraint c;
      c.u = std::min(stubs[i], stubs[i + 1]);
      c.v = std::max(stubs[i], stubs[i + 1]);
      for (std::int64_t a = 1; a <= n; ++a) {
        for (std::int64_t b = 1; b <= n; ++b) {
          const bool forced = planted && (*planted)[static_cast<std::size_t>(c.u)] == a &&
                              (*planted)[static_cast<std::size_t>(c.v)] == b;
          if (forced || rng.coin(static_cast<std::uint64_t>(density.num), static_cast<std::uint64_t>(density.den))) {
            c.allowed.emplace_back(a, b);
          }
        }
      }
      csp.constraints.push_back(std::move(c));
    }
    break;
  }
  csp.validate();
  return csp;
}

// ---- CSP -> MDK ----

/// Vector layout of csp_to_mdk: variable vectors (x, i) at x*n + i - 1, then
/// for each constraint its allowed pairs in order.
struct CspMdkLayout {
  std::int64_t var_vectors = 0;
  std::vector<std::int64_t> edge_offset;

  explicit CspMdkLayout(const CspInstance& csp) : var_vectors(csp.k * csp.n) {
    std::int64_t at = var_vectors;
    for (const auto& c : csp.constraints) {
      edge_offset.push_back(at);
      at += static_cast<std::int64_t>(c.allowed.size());
    }
  }
};

/// Dimensions: k variable guards, |E| edge guards, then per constraint e the
/// incidences (u,e)+, (u,e)-, (v,e)+, (v,e)-. Target 1 on guards and 2Q on
/// incidences; solution size k + |E|.
inline MdkInstance csp_to_mdk(const CspInstance& csp, std::optional<std::int64_t> Q_opt = std::nullopt) {
  csp.validate();
  if (!csp.is_three_regular()) throw Error(ErrorKind::kNotThreeRegular, "constraint graph is not 3-regular");
  const std::int64_t Q = Q_opt.value_or(10 * csp.n);
  if (Q < csp.n) throw Error(ErrorKind::kParameterViolation, "Q must be at least n");
  const auto E = static_cast<std::int64_t>(csp.constraints.size());
  MdkInstance mdk;
  mdk.d = csp.k + E + 4 * E;
  mdk.k = csp.k + E;
  auto incidence = [&](std::int64_t e, int slot) { return csp.k + E + 4 * e + slot; };
  for (std::int64_t x = 0; x < csp.k; ++x) mdk.dim_labels.push_back("guard:var" + std::to_string(x));
  for (std::int64_t e = 0; e < E; ++e) mdk.dim_labels.push_back("guard:edge" + std::to_string(e));
  for (std::int64_t e = 0; e < E; ++e) {
    for (const char* name : {"u+", "u-", "v+", "v-"}) mdk.dim_labels.push_back("edge" + std::to_string(e) + ":" + name);
  }
  mdk.target.assign(static_cast<std::size_t>(mdk.d), 2 * Q);
  for (std::int64_t g = 0; g < csp.k + E; ++g) mdk.target[static_cast<std::size_t>(g)] = 1;

  for (std::int64_t x = 0; x < csp.k; ++x) {
    for (std::int64_t i = 1; i <= csp.n; ++i) {
      std::vector<std::int64_t> vec(static_cast<std::size_t>(mdk.d), 0);
      vec[static_cast<std::size_t>(x)] = 1;
      for (std::int64_t e = 0; e < E; ++e) {
        const auto& c = csp.constraints[static_cast<std::size_t>(e)];
        const int base = c.u == x ? 0 : c.v == x ? 2 : -1;
        if (base < 0) continue;
        vec[static_cast<std::size_t>(incidence(e, base))] = Q + i;
        vec[static_cast<std::size_t>(incidence(e, base + 1))] = Q - i;
      }
      mdk.vectors.push_back(std::move(vec));
      mdk.vector_labels.push_back("var" + std::to_string(x) + "=" + std::to_string(i));
    }
  }
  for (std::int64_t e = 0; e < E; ++e) {
    for (auto [a, b] : csp.constraints[static_cast<std::size_t>(e)].allowed) {
      std::vector<std::int64_t> vec(static_cast<std::size_t>(mdk.d), 0);
      vec[static_cast<std::size_t>(csp.k + e)] = 1;
      vec[static_cast<std::size_t>(incidence(e, 0))] = Q - a;
      vec[static_cast<std::size_t>(incidence(e, 1))] = Q + a;
      vec[static_cast<std::size_t>(incidence(e, 2))] = Q - b;
      vec[static_cast<std::size_t>(incidence(e, 3))] = Q + b;
      mdk.vectors.push_back(std::move(vec));
      mdk.vector_labels.push_back("edge" + std::to_string(e) + "=(" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
  }
  return mdk;
}

/// The k + |E| vectors selected by a satisfying sigma.
inline std::vector<std::int64_t> csp_solution_to_mdk(const CspInstance& csp, const std::vector<std::int64_t>& sigma) {
  if (csp_value(csp, sigma) != Rational(1)) throw Error(ErrorKind::kPreconditionViolated, "sigma does not satisfy the csp");
  const CspMdkLayout layout(csp);
  std::vector<std::int64_t> out;
  for (std::int64_t x = 0; x < csp.k; ++x) out.push_back(x * csp.n + sigma[static_cast<std::size_t>(x)] - 1);
  for (std::size_t e = 0; e < csp.constraints.size(); ++e) {
    const auto& c = csp.constraints[e];
    const auto pair = std::make_pair(sigma[static_cast<std::size_t>(c.u)], sigma[static_cast<std::size_t>(c.v)]);
    const auto pos = std::find(c.allowed.begin(), c.allowed.end(), pair) - c.allowed.begin();
    out.push_back(layout.edge_offset[e] + pos);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Reads sigma off the variable vectors; nothing unless each variable has
/// exactly one.
inline std::optional<std::vector<std::int64_t>> mdk_solution_to_csp(const CspInstance& csp,
                                                                    const std::vector<std::int64_t>& indices) {
  std::vector<std::int64_t> sigma(static_cast<std::size_t>(csp.k), 0);
  for (std::int64_t idx : indices) {
    if (idx < 0 || idx >= csp.k * csp.n) continue;
    auto& slot = sigma[static_cast<std::size_t>(idx / csp.n)];
    if (slot != 0) return std::nullopt;
    slot = idx % csp.n + 1;
  }
  for (std::int64_t v : sigma) {
    if (v == 0) return std::nullopt;
  }
  return sigma;
}

// ---- MDK checks ----

/// At most k distinct indices whose sum dominates the target.
inline bool verify_mdk(const MdkInstance& mdk, const std::vector<std::int64_t>& indices) {
  if (static_cast<std::int64_t>(indices.size()) > mdk.k) return false;
  std::vector<std::int64_t> sum(static_cast<std::size_t>(mdk.d), 0);
  std::set<std::int64_t> seen;
  for (std::int64_t idx : indices) {
    if (idx < 0 || idx >= static_cast<std::int64_t>(mdk.vectors.size()) || !seen.insert(idx).second) return false;
    const auto& v = mdk.vectors[static_cast<std::size_t>(idx)];
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += v[j];
  }
  for (std::size_t j = 0; j < sum.size(); ++j) {
    if (sum[j] < mdk.target[j]) return false;
  }
  return true;
}

inline constexpr std::int64_t kDefaultMdkNodeBudget = 10'000'000;

namespace detail {

class MdkSearch {
 public:
  MdkSearch(const MdkInstance& mdk, std::int64_t budget) : mdk_(mdk), budget_(budget) {}

  std::optional<std::vector<std::int64_t>> run(std::int64_t size) {
    std::vector<std::int64_t> deficit = mdk_.target;
    std::vector<bool> allowed(mdk_.vectors.size(), true);
    std::vector<std::int64_t> chosen;
    if (dfs(deficit, allowed, chosen, size)) {
      std::sort(chosen.begin(), chosen.end());
      return chosen;
    }
    return std::nullopt;
  }

 private:
  bool dfs(std::vector<std::int64_t>& deficit, std::vector<bool>& allowed, std::vector<std::int64_t>& chosen,
           std::int64_t left) {
    if (budget_-- <= 0) throw Error(ErrorKind::kBudgetExceeded, "mdk search node budget exhausted");
    std::vector<std::size_t> open;
    for (std::size_t j = 0; j < deficit.size(); ++j) {
      if (deficit[j] > 0) open.push_back(j);
    }
    if (open.empty()) return true;
    if (left == 0) return false;

    // Candidates per open dimension, and the fewest vectors each one needs.
    std::vector<std::vector<std::size_t>> cand(open.size());
    std::vector<std::int64_t> need(open.size());
    for (std::size_t o = 0; o < open.size(); ++o) {
      const std::size_t j = open[o];
      std::vector<std::int64_t> entries;
      for (std::size_t v = 0; v < mdk_.vectors.size(); ++v) {
        if (allowed[v] && mdk_.vectors[v][j] > 0) {
          cand[o].push_back(v);
          entries.push_back(mdk_.vectors[v][j]);
        }
      }
      std::sort(entries.rbegin(), entries.rend());
      std::int64_t acc = 0;
      std::int64_t count = 0;
      for (std::int64_t x : entries) {
        if (acc >= deficit[j] || count == left) break;
        acc += x;
        ++count;
      }
      if (acc < deficit[j]) return false;
      need[o] = count;
    }
    // Dimensions with pairwise disjoint candidate sets need disjoint picks.
    std::vector<std::size_t> order(open.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (cand[a].size() != cand[b].size()) return cand[a].size() < cand[b].size();
      return a < b;
    });
    std::vector<bool> used(mdk_.vectors.size(), false);
    std::int64_t bound = 0;
    for (std::size_t o : order) {
      if (std::any_of(cand[o].begin(), cand[o].end(), [&](std::size_t v) { return used[v]; })) continue;
      for (std::size_t v : cand[o]) used[v] = true;
      bound += need[o];
      if (bound > left) return false;
    }

    const std::size_t branch = order.front();
    std::vector<std::size_t> excluded;
    bool found = false;
    for (std::size_t v : cand[branch]) {
      allowed[v] = false;
      excluded.push_back(v);
      const auto& vec = mdk_.vectors[v];
      for (std::size_t t = 0; t < deficit.size(); ++t) deficit[t] -= vec[t];
      chosen.push_back(static_cast<std::int64_t>(v));
      found = dfs(deficit, allowed, chosen, left - 1);
      if (found) break;
      chosen.pop_back();
      for (std::size_t t = 0; t < deficit.size(); ++t) deficit[t] += vec[t];
    }
    for (std::size_t v : excluded) allowed[v] = true;
    return found;
  }

  const MdkInstance& mdk_;
  std::int64_t budget_;
};

}  // namespace detail

/// Minimum-size index set (at most kmax) whose sum dominates the target.
/// Iterative deepening; each level branches on the open dimension with the
/// fewest usable vectors.
inline std::optional<std::vector<std::int64_t>> solve_mdk_exact(const MdkInstance& mdk, std::int64_t kmax,
                                                                std::int64_t node_budget = kDefaultMdkNodeBudget) {
  mdk.validate();
  detail::MdkSearch search(mdk, node_budget);
  const std::int64_t top = std::min<std::int64_t>(kmax, static_cast<std::int64_t>(mdk.vectors.size()));
  for (std::int64_t size = 0; size <= top; ++size) {
    if (auto found = search.run(size)) return found;
  }
  return std::nullopt;
}

// ---- MDK -> capacitated vertex cover ----

struct CvcReduction {
  Instance inst;
  /// Solution-size parameter k + d.
  std::int64_t k_param = 0;
  /// Weight budget for the weighted variant.
  std::optional<std::int64_t> weight_budget;
  std::int64_t num_vectors = 0;
  std::int64_t dims = 0;

  ElementId u(std::int64_t v) const { return v; }
  ElementId d_vertex(std::int64_t i) const { return num_vectors + i; }
  ElementId d_prime(std::int64_t i) const { return num_vectors + dims + i; }
};

namespace detail {

inline CvcReduction build_cvc(const MdkInstance& mdk, bool weighted) {
  mdk.validate();
  const auto N = static_cast<std::int64_t>(mdk.vectors.size());
  const std::int64_t d = mdk.d;
  std::vector<std::int64_t> column(static_cast<std::size_t>(d), 0);
  for (const auto& v : mdk.vectors) {
    for (std::int64_t i = 0; i < d; ++i) column[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
  }
  std::int64_t m = d;
  for (std::int64_t i = 0; i < d; ++i) {
    if (mdk.target[static_cast<std::size_t>(i)] > column[static_cast<std::size_t>(i)]) {
      throw Error(ErrorKind::kTargetExceedsColumnSum, "target exceeds column sum in dimension " + std::to_string(i));
    }
    m += column[static_cast<std::size_t>(i)];
  }
  CvcReduction red;
  red.num_vectors = N;
  red.dims = d;
  red.k_param = mdk.k + d;
  std::vector<Subset> family;
  for (std::int64_t i = 0; i < d; ++i) {
    family.push_back({red.d_vertex(i), red.d_prime(i)});
    for (std::int64_t v = 0; v < N; ++v) {
      for (std::int64_t c = 0; c < mdk.vectors[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)]; ++c) {
        family.push_back({red.u(v), red.d_vertex(i)});
      }
    }
  }
  const std::int64_t n = N + 2 * d;
  const std::int64_t heavy = n * m + 1;
  std::vector<Element> elements;
  for (std::int64_t v = 0; v < N; ++v) elements.push_back(Element{red.u(v), m, 1, 1});
  for (std::int64_t i = 0; i < d; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    elements.push_back(Element{red.d_vertex(i), column[idx] - mdk.target[idx] + 1, 1, weighted ? 0 : 1});
  }
  for (std::int64_t i = 0; i < d; ++i) elements.push_back(Element{red.d_prime(i), 0, 1, weighted ? heavy : 1});
  red.inst = Instance(2, std::move(elements), std::move(family));
  if (weighted) red.weight_budget = mdk.k;
  return red;
}

}  // namespace detail

/// Vertices U (one per vector), D and D' (one each per dimension). Edge
/// (d_i, d'_i) per dimension and v_i parallel edges (u_v, d_i). cap(d_i) =
/// column sum - target + 1, cap(U) = m, cap(D') = 0, multiplicity 1.
inline CvcReduction mdk_to_cvc(const MdkInstance& mdk) { return detail::build_cvc(mdk, false); }

/// As mdk_to_cvc with weights 1 on U, 0 on D and n*m + 1 on D'; budget k.
inline CvcReduction mdk_to_wcvc(const MdkInstance& mdk) { return detail::build_cvc(mdk, true); }

inline Solution mdk_solution_to_cvc(const CvcReduction& red, const std::vector<std::int64_t>& indices) {
  std::vector<ElementId> ids;
  for (std::int64_t v : indices) ids.push_back(red.u(v));
  for (std::int64_t i = 0; i < red.dims; ++i) ids.push_back(red.d_vertex(i));
  return Solution::of(ids);
}

/// Restriction of a vertex set to U, as vector indices.
inline std::vector<std::int64_t> cvc_solution_to_mdk(const CvcReduction& red, const Solution& sol) {
  std::vector<std::int64_t> out;
  for (const auto& [x, c] : sol.copies) {
    if (x >= 0 && x < red.num_vectors && c > 0) out.push_back(x);
  }
  return out;
}

// ---- Universe covering families ----

using CoveringFamily = std::vector<std::vector<std::int64_t>>;

inline constexpr std::int64_t kDefaultCoveringBudget = 1'000'000;

struct Exhaustive {
  std::int64_t budget = kDefaultCoveringBudget;
};
struct Sampled {
  std::int64_t samples = 1000;
  std::uint64_t seed = 0;
};
using CoveringCheck = std::variant<Exhaustive, Sampled>;

namespace detail {

inline std::int64_t ceil_rational_times(const Rational& q, std::int64_t x) {
  const __int128 p = static_cast<__int128>(q.num) * x;
  return static_cast<std::int64_t>((p + q.den - 1) / q.den);
}

inline bool covers_enough(const CoveringFamily& family, const std::vector<std::size_t>& pick, std::int64_t n,
                          const Rational& beta) {
  std::set<std::int64_t> seen;
  for (std::size_t i : pick) seen.insert(family[i].begin(), family[i].end());
  // |union| >= (1 - beta) n
  return static_cast<__int128>(seen.size()) * beta.den >= static_cast<__int128>(beta.den - beta.num) * n;
}

inline std::int64_t binom_capped(std::int64_t a, std::int64_t b, std::int64_t cap) {
  if (b < 0 || b > a) return 0;
  b = std::min(b, a - b);
  __int128 r = 1;
  for (std::int64_t i = 1; i <= b; ++i) {
    r = r * (a - b + i) / i;
    if (r > cap) return cap + 1;
  }
  return static_cast<std::int64_t>(r);
}

}  // namespace detail

/// Every subfamily of at least ceil(alpha |F|) members must cover at least
/// (1 - beta) n points. Unions only grow, so subfamilies of exactly that
/// size suffice. Sampled draws random subfamilies of that size: a rejection
/// is definitive, an acceptance is not.
inline bool verify_covering_family(const CoveringFamily& family, std::int64_t n, Rational alpha, Rational beta,
                                   const CoveringCheck& mode) {
  const auto F = static_cast<std::int64_t>(family.size());
  const std::int64_t s = std::max<std::int64_t>(0, detail::ceil_rational_times(alpha, F));
  if (s > F) return true;
  if (const auto* ex = std::get_if<Exhaustive>(&mode)) {
    if (detail::binom_capped(F, s, ex->budget) > ex->budget) {
      throw Error(ErrorKind::kBudgetExceeded, "too many subfamilies for exhaustive verification");
    }
    std::vector<std::size_t> idx(static_cast<std::size_t>(s));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      if (!detail::covers_enough(family, idx, n, beta)) return false;
      std::size_t pos = idx.size();
      while (pos > 0 && idx[pos - 1] == static_cast<std::size_t>(F - s) + pos - 1) --pos;
      if (pos == 0) return true;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < idx.size(); ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  const auto& sm = std::get<Sampled>(mode);
  Rng rng(sm.seed);
  for (std::int64_t t = 0; t < sm.samples; ++t) {
    std::vector<std::size_t> pick;
    for (std::int64_t i : rng.subset(F, s)) pick.push_back(static_cast<std::size_t>(i));
    if (!detail::covers_enough(family, pick, n, beta)) return false;
  }
  return true;
}

/// Requires 0 < alpha <= 1, 0 < beta < 1, r <= n and
/// r > log_{1/(1-beta)}(e^2 / alpha).
inline void check_covering_parameters(std::int64_t n, const Rational& alpha, const Rational& beta, std::int64_t r) {
  if (!(alpha > Rational(0)) || alpha > Rational(1)) throw Error(ErrorKind::kParameterViolation, "alpha must lie in (0, 1]");
  if (!(beta > Rational(0)) || !(beta < Rational(1))) throw Error(ErrorKind::kParameterViolation, "beta must lie in (0, 1)");
  if (r < 1 || r > n) throw Error(ErrorKind::kParameterViolation, "r must lie in [1, n]");
  const double bound = std::log(std::exp(2.0) / alpha.to_double()) / std::log(1.0 / (1.0 - beta.to_double()));
  if (!(static_cast<double>(r) > bound)) {
    throw Error(ErrorKind::kParameterViolation, "r must exceed log_{1/(1-beta)}(e^2/alpha) = " + std::to_string(bound));
  }
}

/// Samples families of ceil(n / alpha) uniform r-subsets of {0..n-1} and
/// returns the first that verifies (exhaustively when affordable).
inline std::optional<CoveringFamily> build_covering_family(std::int64_t n, Rational alpha, Rational beta, std::int64_t r,
                                                           std::uint64_t seed, std::int64_t trials) {
  check_covering_parameters(n, alpha, beta, r);
  const std::int64_t size = detail::ceil_rational_times(Rational(alpha.den, alpha.num), n);
  const std::int64_t s = detail::ceil_rational_times(alpha, size);
  const bool exhaustive = detail::binom_capped(size, s, kDefaultCoveringBudget) <= kDefaultCoveringBudget;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    CoveringFamily family;
    for (std::int64_t i = 0; i < size; ++i) family.push_back(rng.subset(n, r));
    const CoveringCheck mode = exhaustive ? CoveringCheck{Exhaustive{}}
                                          : CoveringCheck{Sampled{1000, mix_seed(seed, static_cast<std::uint64_t>(t) + 0x5eed)}};
    if (verify_covering_family(family, n, alpha, beta, mode)) return family;
  }
  return std::nullopt;
}

// ---- Covering-family CSP -> MDK ----

struct CoveringMdkReduction {
  MdkInstance mdk;
  /// N[A_i]: A_i plus its constraint-graph neighbors, sorted.
  std::vector<std::vector<std::int64_t>> neighborhoods;
  /// Per vector: the family member and its values on N[A_i].
  std::vector<std::pair<std::size_t, std::vector<std::int64_t>>> owners;
};

inline constexpr std::int64_t kDefaultEnumerationBudget = 1'000'000;

/// One vector per family member A_i and assignment of N[A_i] satisfying every
/// constraint inside N[A_i]: 1 in guard i, and for each j and shared u the
/// pair (i,j,u)+ / (i,j,u)- set to Q-g(u) / Q+g(u) when i is the smaller
/// index and Q+g(u) / Q-g(u) otherwise. Target 1 on guards, 2Q elsewhere;
/// solution size |family|. Q defaults to 10 n k.
inline CoveringMdkReduction csp_to_mdk_covering(const CspInstance& csp, const CoveringFamily& family,
                                                std::optional<std::int64_t> Q_opt = std::nullopt,
                                                std::int64_t budget = kDefaultEnumerationBudget) {
  csp.validate();
  const std::int64_t Q = Q_opt.value_or(10 * csp.n * csp.k);
  if (Q < csp.n) throw Error(ErrorKind::kParameterViolation, "Q must be at least n");
  CoveringMdkReduction red;
  std::vector<std::set<std::int64_t>> adj(static_cast<std::size_t>(csp.k));
  for (const auto& c : csp.constraints) {
    adj[static_cast<std::size_t>(c.u)].insert(c.v);
    adj[static_cast<std::size_t>(c.v)].insert(c.u);
  }
  for (const auto& A : family) {
    std::set<std::int64_t> nb;
    for (std::int64_t x : A) {
      if (x < 0 || x >= csp.k) throw Error(ErrorKind::kPreconditionViolated, "family names unknown variable");
      nb.insert(x);
      nb.insert(adj[static_cast<std::size_t>(x)].begin(), adj[static_cast<std::size_t>(x)].end());
    }
    red.neighborhoods.emplace_back(nb.begin(), nb.end());
  }

  const auto F = family.size();
  MdkInstance& mdk = red.mdk;
  mdk.k = static_cast<std::int64_t>(F);
  for (std::size_t i = 0; i < F; ++i) mdk.dim_labels.push_back("guard:set" + std::to_string(i));
  // shared[(i, j)] = N[A_i] & N[A_j]; dimension of (i,j,u)+ is plus_dim, - is plus_dim + 1.
  std::map<std::tuple<std::size_t, std::size_t, std::int64_t>, std::int64_t> plus_dim;
  std::int64_t next = static_cast<std::int64_t>(F);
  for (std::size_t i = 0; i < F; ++i) {
    for (std::size_t j = i + 1; j < F; ++j) {
      std::vector<std::int64_t> common;
      std::set_intersection(red.neighborhoods[i].begin(), red.neighborhoods[i].end(), red.neighborhoods[j].begin(),
                            red.neighborhoods[j].end(), std::back_inserter(common));
      for (std::int64_t u : common) {
        plus_dim[{i, j, u}] = next;
        const std::string tag = "(" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(u) + ")";
        mdk.dim_labels.push_back(tag + "+");
        mdk.dim_labels.push_back(tag + "-");
        next += 2;
      }
    }
  }
  mdk.d = next;
  mdk.target.assign(static_cast<std::size_t>(mdk.d), 2 * Q);
  for (std::size_t i = 0; i < F; ++i) mdk.target[i] = 1;

  std::int64_t produced = 0;
  for (std::size_t i = 0; i < F; ++i) {
    const auto& nb = red.neighborhoods[i];
    std::int64_t count = 1;
    for (std::size_t t = 0; t < nb.size(); ++t) {
      if (count > budget / csp.n) throw Error(ErrorKind::kEnumerationBudgetExceeded, "too many local assignments");
      count *= csp.n;
    }
    std::vector<std::int64_t> val(nb.size(), 1);
    auto value_of = [&](std::int64_t x) -> std::int64_t {
      const auto pos = std::lower_bound(nb.begin(), nb.end(), x) - nb.begin();
      return (static_cast<std::size_t>(pos) < nb.size() && nb[static_cast<std::size_t>(pos)] == x) ? val[static_cast<std::size_t>(pos)] : 0;
    };
    while (true) {
      bool ok = true;
      for (const auto& c : csp.constraints) {
        const std::int64_t a = value_of(c.u);
        const std::int64_t b = value_of(c.v);
        if (a && b && !c.allows(a, b)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        if (++produced > budget) throw Error(ErrorKind::kEnumerationBudgetExceeded, "too many vectors");
        std::vector<std::int64_t> vec(static_cast<std::size_t>(mdk.d), 0);
        vec[i] = 1;
        for (const auto& [key, dim] : plus_dim) {
          const auto& [a, b, u] = key;
          if (a != i && b != i) continue;
          const std::int64_t g = value_of(u);
          const bool smaller = a == i;
          vec[static_cast<std::size_t>(dim)] = smaller ? Q - g : Q + g;
          vec[static_cast<std::size_t>(dim + 1)] = smaller ? Q + g : Q - g;
        }
        mdk.vectors.push_back(std::move(vec));
        red.owners.emplace_back(i, val);
        std::string label = "set" + std::to_string(i) + ":";
        for (std::size_t t = 0; t < nb.size(); ++t) label += (t ? "," : "") + std::to_string(nb[t]) + "=" + std::to_string(val[t]);
        mdk.vector_labels.push_back(std::move(label));
      }
      std::size_t t = 0;
      while (t < val.size() && val[t] == csp.n) val[t++] = 1;
      if (t == val.size()) break;
      ++val[t];
    }
  }
  return red;
}

/// The |family| vectors matching a satisfying sigma.
inline std::vector<std::int64_t> csp_solution_to_mdk_covering(const CoveringMdkReduction& red,
                                                              const std::vector<std::int64_t>& sigma) {
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < red.neighborhoods.size(); ++i) {
    std::vector<std::int64_t> want;
    for (std::int64_t x : red.neighborhoods[i]) want.push_back(sigma.at(static_cast<std::size_t>(x)));
    bool hit = false;
    for (std::size_t v = 0; v < red.owners.size(); ++v) {
      if (red.owners[v].first == i && red.owners[v].second == want) {
        out.push_back(static_cast<std::int64_t>(v));
        hit = true;
        break;
      }
    }
    if (!hit) throw Error(ErrorKind::kPreconditionViolated, "sigma violates a constraint inside some neighborhood");
  }
  return out;
}

}  // namespace caphs
