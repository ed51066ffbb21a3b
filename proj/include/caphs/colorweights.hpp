#pragma once

// Seeded random colorings (in place of a perfect hash family) and the
// doubling sweep of weight estimates.

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "caphs/core.hpp"
#include "caphs/rng.hpp"

namespace caphs {

/// parts[c] lists the ids with color c, in input order.
using Coloring = std::vector<std::vector<ElementId>>;

inline std::vector<Coloring> random_colorings(const std::vector<ElementId>& ids, std::int64_t k, std::int64_t trials,
                                              std::uint64_t seed) {
  if (k < 1) throw Error(ErrorKind::kParameterViolation, "k must be positive");
  if (trials < 1) throw Error(ErrorKind::kParameterViolation, "trials must be positive");
  std::vector<Coloring> out;
  out.reserve(static_cast<std::size_t>(trials));
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    Coloring parts(static_cast<std::size_t>(k));
    for (ElementId x : ids) parts[rng.below(static_cast<std::uint64_t>(k))].push_back(x);
    out.push_back(std::move(parts));
  }
  return out;
}

/// True iff every part holds exactly one element of `target` and the target
/// has one element per part.
inline bool separates(const Coloring& coloring, const std::vector<ElementId>& target) {
  std::set<ElementId> want(target.begin(), target.end());
  if (want.size() != target.size() || want.size() != coloring.size()) return false;
  for (const auto& part : coloring) {
    std::size_t hits = 0;
    for (ElementId x : part) hits += want.count(x);
    if (hits != 1) return false;
  }
  return true;
}

/// Default trial count ceil(e^k * k * ln(n + 1)), clamped to [1, cap].
inline std::int64_t default_color_trials(std::int64_t k, std::int64_t n, std::int64_t cap) {
  const double raw = std::ceil(std::exp(static_cast<double>(k)) * static_cast<double>(k) *
                               std::log(static_cast<double>(n) + 1.0));
  if (!(raw < static_cast<double>(cap))) return cap;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(raw));
}

/// w_min * 2^j below the total weight sum(w * min(k, M)), then the total.
/// w_min is the smallest positive weight; all-zero weights give {0}.
inline std::vector<std::int64_t> weight_estimates(const Instance& inst, std::int64_t k) {
  if (inst.n() == 0) throw Error(ErrorKind::kPreconditionViolated, "instance has no elements");
  std::int64_t total = 0;
  std::int64_t w_min = 0;
  for (const Element& e : inst.elements()) {
    total += e.weight * e.clamped_mult(k);
    if (e.weight > 0 && (w_min == 0 || e.weight < w_min)) w_min = e.weight;
  }
  if (total == 0) return {0};
  std::vector<std::int64_t> out;
  for (std::int64_t w = w_min; w < total; w *= 2) out.push_back(w);
  out.push_back(total);
  return out;
}

}  // namespace caphs
