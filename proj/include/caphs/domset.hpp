#pragma once

// Red-blue domination in a bipartite graph: choose reds D so that every
// blue has a neighbor in D.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "caphs/error.hpp"

namespace caphs {

struct BipartiteGraph {
  std::vector<std::int64_t> reds;
  std::vector<std::int64_t> blues;
  /// blue -> adjacent reds
  std::map<std::int64_t, std::vector<std::int64_t>> adj;

  /// Sorts reds and blues and collapses parallel edges. Throws
  /// PreconditionViolated on dangling endpoints.
  void normalize() {
    std::sort(reds.begin(), reds.end());
    reds.erase(std::unique(reds.begin(), reds.end()), reds.end());
    std::sort(blues.begin(), blues.end());
    blues.erase(std::unique(blues.begin(), blues.end()), blues.end());
    for (auto& [b, rs] : adj) {
      if (!std::binary_search(blues.begin(), blues.end(), b)) {
        throw Error(ErrorKind::kPreconditionViolated, "adjacency for unknown blue " + std::to_string(b));
      }
      std::sort(rs.begin(), rs.end());
      rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
      for (std::int64_t r : rs) {
        if (!std::binary_search(reds.begin(), reds.end(), r)) {
          throw Error(ErrorKind::kPreconditionViolated, "edge to unknown red " + std::to_string(r));
        }
      }
    }
  }

  const std::vector<std::int64_t>& neighbors(std::int64_t blue) const {
    static const std::vector<std::int64_t> kNone;
    auto it = adj.find(blue);
    return it == adj.end() ? kNone : it->second;
  }
};

inline bool dominates(const BipartiteGraph& g, const std::vector<std::int64_t>& D) {
  std::set<std::int64_t> chosen(D.begin(), D.end());
  for (std::int64_t b : g.blues) {
    const auto& ns = g.neighbors(b);
    if (std::none_of(ns.begin(), ns.end(), [&](std::int64_t r) { return chosen.count(r) != 0; })) return false;
  }
  return true;
}

/// Round-based construction: while some red sees two undominated blues, take
/// the smallest such red; then cover each leftover blue by its smallest
/// neighbor. Result has at most floor((b + r) / 3) reds.
inline std::vector<std::int64_t> construct_small_dominator(BipartiteGraph g) {
  g.normalize();
  const auto b = static_cast<std::int64_t>(g.blues.size());
  const auto r = static_cast<std::int64_t>(g.reds.size());
  for (std::int64_t blue : g.blues) {
    if (g.neighbors(blue).size() < 2) {
      throw Error(ErrorKind::kPreconditionViolated, "blue " + std::to_string(blue) + " has degree below 2");
    }
  }
  if (!(r < 2 * b)) throw Error(ErrorKind::kPreconditionViolated, "requires r < 2b");

  std::map<std::int64_t, std::vector<std::int64_t>> red_adj;
  for (std::int64_t blue : g.blues) {
    for (std::int64_t red : g.neighbors(blue)) red_adj[red].push_back(blue);
  }
  std::set<std::int64_t> open(g.blues.begin(), g.blues.end());
  std::vector<std::int64_t> D;
  std::set<std::int64_t> used;
  while (true) {
    std::optional<std::int64_t> pick;
    for (std::int64_t red : g.reds) {
      if (used.count(red)) continue;
      std::size_t seen = 0;
      for (std::int64_t blue : red_adj[red]) seen += open.count(blue);
      if (seen >= 2) {
        pick = red;
        break;
      }
    }
    if (!pick) break;
    D.push_back(*pick);
    used.insert(*pick);
    for (std::int64_t blue : red_adj[*pick]) open.erase(blue);
  }
  for (std::int64_t blue : std::vector<std::int64_t>(open.begin(), open.end())) {
    if (!open.count(blue)) continue;
    const std::int64_t red = g.neighbors(blue).front();
    D.push_back(red);
    for (std::int64_t other : red_adj[red]) open.erase(other);
  }
  std::sort(D.begin(), D.end());
  return D;
}

inline constexpr std::size_t kMaxExactReds = 20;

/// Minimum dominator containing `forced`; among minima the lexicographically
/// smallest sorted set. Nothing if even all reds fail.
inline std::optional<std::vector<std::int64_t>> min_dominator_forced(BipartiteGraph g,
                                                                     std::vector<std::int64_t> forced,
                                                                     std::size_t max_reds = kMaxExactReds) {
  g.normalize();
  if (g.reds.size() > max_reds) {
    throw Error(ErrorKind::kPreconditionViolated, "exact dominator limited to " + std::to_string(max_reds) + " reds");
  }
  std::sort(forced.begin(), forced.end());
  forced.erase(std::unique(forced.begin(), forced.end()), forced.end());
  for (std::int64_t f : forced) {
    if (!std::binary_search(g.reds.begin(), g.reds.end(), f)) {
      throw Error(ErrorKind::kPreconditionViolated, "forced vertex is not a red");
    }
  }
  if (!dominates(g, g.reds)) return std::nullopt;

  std::vector<std::int64_t> free;
  std::set_difference(g.reds.begin(), g.reds.end(), forced.begin(), forced.end(), std::back_inserter(free));
  // Combinations of the free reds by size, each size in lexicographic order.
  for (std::size_t extra = 0; extra <= free.size(); ++extra) {
    std::optional<std::vector<std::int64_t>> best;
    std::vector<std::size_t> idx(extra);
    for (std::size_t i = 0; i < extra; ++i) idx[i] = i;
    while (true) {
      std::vector<std::int64_t> D = forced;
      for (std::size_t i : idx) D.push_back(free[i]);
      std::sort(D.begin(), D.end());
      if (dominates(g, D) && (!best || D < *best)) best = D;
      // advance
      std::size_t pos = extra;
      while (pos > 0 && idx[pos - 1] == free.size() - extra + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < extra; ++i) idx[i] = idx[i - 1] + 1;
    }
    if (best) return best;
  }
  return std::nullopt;
}

}  // namespace caphs
