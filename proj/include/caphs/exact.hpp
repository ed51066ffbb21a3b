#pragma once

// Exhaustive solvers over multisets of element copies. Ground truth for the
// approximation tests; only usable on micro instances.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "caphs/feasibility.hpp"

namespace caphs {

inline constexpr std::int64_t kDefaultExactBudget = 1'000'000;

struct ExactResult {
  Solution sol;
  Assignment asg;
  std::int64_t weight = 0;
};

namespace detail {

/// Number of multisets of size <= k with per-element copies <= limits[j],
/// saturated at cap + 1.
inline std::int64_t count_multisets(const std::vector<std::int64_t>& limits, std::int64_t k, std::int64_t cap) {
  std::vector<std::int64_t> ways(static_cast<std::size_t>(k) + 1, 0);
  ways[0] = 1;
  for (std::int64_t limit : limits) {
    std::vector<std::int64_t> next(ways.size(), 0);
    for (std::int64_t s = 0; s <= k; ++s) {
      std::int64_t acc = 0;
      for (std::int64_t c = 0; c <= limit && c <= s; ++c) acc = std::min(cap + 1, acc + ways[static_cast<std::size_t>(s - c)]);
      next[static_cast<std::size_t>(s)] = acc;
    }
    ways = std::move(next);
  }
  std::int64_t total = 0;
  for (std::int64_t w : ways) total = std::min(cap + 1, total + w);
  return total;
}

/// Calls visit on every multiset of size exactly `size`, ascending ids.
inline void for_each_multiset(const std::vector<ElementId>& ids, const std::vector<std::int64_t>& limits,
                              std::int64_t size, const std::function<void(const Solution&)>& visit) {
  Solution current;
  auto rec = [&](auto&& self, std::size_t j, std::int64_t left) -> void {
    if (left == 0) {
      visit(current);
      return;
    }
    if (j == ids.size()) return;
    const std::int64_t top = std::min(left, limits[j]);
    for (std::int64_t c = top; c >= 0; --c) {
      if (c > 0) current.copies[ids[j]] = c;
      self(self, j + 1, left - c);
      current.copies.erase(ids[j]);
    }
  };
  rec(rec, 0, size);
}

inline void check_exact_budget(const Instance& inst, std::int64_t k, std::int64_t budget,
                               std::vector<ElementId>& ids, std::vector<std::int64_t>& limits) {
  if (k < 0) throw Error(ErrorKind::kParameterViolation, "k must be nonnegative");
  ids = inst.sorted_ids();
  limits.clear();
  for (ElementId x : ids) limits.push_back(inst.element(x).clamped_mult(k));
  if (count_multisets(limits, k, budget) > budget) {
    throw Error(ErrorKind::kBudgetExceeded, "exact enumeration exceeds budget of " + std::to_string(budget) + " candidates");
  }
}

}  // namespace detail

/// Minimum-size feasible solution of size <= k; ties go to the smallest
/// copies map in (id, count) lexicographic order.
inline std::optional<ExactResult> solve_exact(const Instance& inst, std::int64_t k,
                                              std::int64_t budget = kDefaultExactBudget) {
  std::vector<ElementId> ids;
  std::vector<std::int64_t> limits;
  detail::check_exact_budget(inst, k, budget, ids, limits);
  for (std::int64_t size = 0; size <= k; ++size) {
    std::optional<ExactResult> best;
    detail::for_each_multiset(ids, limits, size, [&](const Solution& cand) {
      if (best && !(cand.copies < best->sol.copies)) return;
      if (auto asg = check_feasible(inst, cand)) best = ExactResult{cand, *asg, cand.weight(inst)};
    });
    if (best) return best;
  }
  return std::nullopt;
}

/// Minimum-weight feasible solution of size <= k; ties by size, then copies.
inline std::optional<ExactResult> solve_exact_weighted(const Instance& inst, std::int64_t k,
                                                       std::int64_t budget = kDefaultExactBudget) {
  std::vector<ElementId> ids;
  std::vector<std::int64_t> limits;
  detail::check_exact_budget(inst, k, budget, ids, limits);
  std::optional<ExactResult> best;
  for (std::int64_t size = 0; size <= k; ++size) {
    detail::for_each_multiset(ids, limits, size, [&](const Solution& cand) {
      const std::int64_t w = cand.weight(inst);
      if (best) {
        if (w > best->weight) return;
        if (w == best->weight && (size > best->sol.size() || !(cand.copies < best->sol.copies))) return;
      }
      if (auto asg = check_feasible(inst, cand)) best = ExactResult{cand, *asg, w};
    });
  }
  return best;
}

}  // namespace caphs
