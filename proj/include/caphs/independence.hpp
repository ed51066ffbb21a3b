#pragma once

// (S, pi, rho)-independence: x and y conflict when, inside some star A_s,
// the sets containing both exceed a rho fraction of the smaller incidence.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "caphs/core.hpp"
#include "caphs/rational.hpp"

namespace caphs {

struct IndependenceContext {
  Subset S;
  std::map<ElementId, std::vector<SetIndex>> stars;
  Rational rho{1};
};

namespace detail {

/// For each star (in map order), the sorted indices of A_s containing x.
inline std::vector<std::vector<SetIndex>> star_incidence(const IndependenceContext& ctx, ElementId x,
                                                         const Instance& inst) {
  std::vector<std::vector<SetIndex>> out;
  out.reserve(ctx.stars.size());
  for (const auto& [s, indices] : ctx.stars) {
    std::vector<SetIndex> hits;
    for (SetIndex i : indices) {
      if (Instance::set_contains(inst.family()[i], x)) hits.push_back(i);
    }
    out.push_back(std::move(hits));
  }
  return out;
}

inline bool conflicting(const std::vector<std::vector<SetIndex>>& a, const std::vector<std::vector<SetIndex>>& b,
                        const Rational& rho) {
  for (std::size_t s = 0; s < a.size(); ++s) {
    const auto& ax = a[s];
    const auto& by = b[s];
    std::size_t common = 0;
    for (std::size_t i = 0, j = 0; i < ax.size() && j < by.size();) {
      if (ax[i] < by[j]) {
        ++i;
      } else if (by[j] < ax[i]) {
        ++j;
      } else {
        ++common;
        ++i;
        ++j;
      }
    }
    const auto smaller = static_cast<__int128>(std::min(ax.size(), by.size()));
    if (static_cast<__int128>(common) * rho.den > smaller * rho.num) return true;
  }
  return false;
}

}  // namespace detail

inline bool is_conflicting(const IndependenceContext& ctx, ElementId x, ElementId y, const Instance& inst) {
  return detail::conflicting(detail::star_incidence(ctx, x, inst), detail::star_incidence(ctx, y, inst), ctx.rho);
}

inline std::int64_t count_conflicting_pairs(const IndependenceContext& ctx, const std::vector<ElementId>& X,
                                            const Instance& inst) {
  std::vector<std::vector<std::vector<SetIndex>>> inc;
  inc.reserve(X.size());
  for (ElementId x : X) inc.push_back(detail::star_incidence(ctx, x, inst));
  std::int64_t count = 0;
  for (std::size_t a = 0; a < X.size(); ++a) {
    for (std::size_t b = a + 1; b < X.size(); ++b) {
      if (detail::conflicting(inc[a], inc[b], ctx.rho)) ++count;
    }
  }
  return count;
}

/// Greedy pick of quotas[i] pairwise non-conflicting elements from each part.
/// Parts go in index order; inside a part, candidates with fewer conflicts in
/// the whole union come first, then smaller ids.
inline std::optional<std::vector<ElementId>> find_independent_set(const IndependenceContext& ctx,
                                                                  const std::vector<std::vector<ElementId>>& parts,
                                                                  const std::vector<int>& quotas,
                                                                  const Instance& inst) {
  if (quotas.size() != parts.size()) throw Error(ErrorKind::kQuotaInvalid, "one quota per part is required");
  for (int q : quotas) {
    if (q != 1 && q != 2) throw Error(ErrorKind::kQuotaInvalid, "quotas must be 1 or 2");
  }
  std::vector<ElementId> all;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (ElementId x : parts[i]) {
      all.push_back(x);
    }
  }
  std::vector<std::vector<std::vector<SetIndex>>> inc;
  inc.reserve(all.size());
  for (ElementId x : all) inc.push_back(detail::star_incidence(ctx, x, inst));
  const std::size_t n = all.size();
  std::vector<std::vector<bool>> clash(n, std::vector<bool>(n, false));
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (detail::conflicting(inc[a], inc[b], ctx.rho)) {
        clash[a][b] = clash[b][a] = true;
        ++degree[a];
        ++degree[b];
      }
    }
  }

  std::vector<std::size_t> chosen;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < parts[i].size(); ++j) order.push_back(offset + j);
    offset += parts[i].size();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (degree[a] != degree[b]) return degree[a] < degree[b];
      return all[a] < all[b];
    });
    int taken = 0;
    for (std::size_t c : order) {
      if (taken == quotas[i]) break;
      bool ok = true;
      for (std::size_t p : chosen) {
        if (all[p] == all[c] || clash[p][c]) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      chosen.push_back(c);
      ++taken;
    }
    if (taken < quotas[i]) return std::nullopt;
  }
  std::vector<ElementId> result;
  for (std::size_t c : chosen) result.push_back(all[c]);
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace caphs
