#pragma once

// Instance data model for Capacitated d-Hitting Set: elements with capacity,
// multiplicity and weight; a multi-family of small sets; solutions as
// multisets of bought copies; assignments mapping each set occurrence to a
// member element.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "caphs/error.hpp"
#include "caphs/rng.hpp"

namespace caphs {

using ElementId = std::int64_t;
using SetIndex = std::size_t;
/// Sorted list of distinct element ids.
using Subset = std::vector<ElementId>;

struct Element {
  ElementId id = 0;
  std::int64_t cap = 0;
  /// nullopt means unbounded multiplicity.
  std::optional<std::int64_t> mult = 1;
  std::int64_t weight = 0;

  /// min(k, M(x)), the number of copies any size-k solution can use.
  std::int64_t clamped_mult(std::int64_t k) const { return mult ? std::min(k, *mult) : k; }

  bool operator==(const Element&) const = default;
};

class Instance {
 public:
  Instance() = default;

  /// Validates and canonicalizes: each set is sorted, and must be nonempty,
  /// duplicate-free, of size <= d and reference existing elements.
  Instance(int d, std::vector<Element> elements, std::vector<Subset> family)
      : d_(d), elements_(std::move(elements)), family_(std::move(family)) {
    if (d_ < 1) throw Error(ErrorKind::kValidationError, "d must be positive");
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      const Element& e = elements_[i];
      if (e.cap < 0) throw Error(ErrorKind::kValidationError, "negative capacity for element " + std::to_string(e.id));
      if (e.weight < 0) throw Error(ErrorKind::kValidationError, "negative weight for element " + std::to_string(e.id));
      if (e.mult && *e.mult < 1) throw Error(ErrorKind::kValidationError, "multiplicity below 1 for element " + std::to_string(e.id));
      if (!position_.emplace(e.id, i).second) {
        throw Error(ErrorKind::kValidationError, "duplicate element id " + std::to_string(e.id));
      }
    }
    for (std::size_t i = 0; i < family_.size(); ++i) {
      Subset& set = family_[i];
      const std::string where = "set " + std::to_string(i);
      if (set.empty()) throw Error(ErrorKind::kValidationError, where + " is empty");
      std::sort(set.begin(), set.end());
      if (std::adjacent_find(set.begin(), set.end()) != set.end()) {
        throw Error(ErrorKind::kValidationError, where + " repeats an element");
      }
      if (set.size() > static_cast<std::size_t>(d_)) {
        throw Error(ErrorKind::kValidationError, where + " has more than d elements");
      }
      for (ElementId x : set) {
        if (!contains(x)) throw Error(ErrorKind::kValidationError, where + " names unknown element " + std::to_string(x));
      }
    }
  }

  int d() const { return d_; }
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<Subset>& family() const { return family_; }
  std::size_t n() const { return elements_.size(); }
  std::size_t m() const { return family_.size(); }

  bool contains(ElementId id) const { return position_.count(id) != 0; }

  std::size_t position(ElementId id) const {
    auto it = position_.find(id);
    if (it == position_.end()) throw Error(ErrorKind::kUnknownElement, "no element " + std::to_string(id));
    return it->second;
  }

  const Element& element(ElementId id) const { return elements_[position(id)]; }

  /// Element ids in ascending order.
  std::vector<ElementId> sorted_ids() const {
    std::vector<ElementId> ids;
    ids.reserve(elements_.size());
    for (const Element& e : elements_) ids.push_back(e.id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  static bool set_contains(const Subset& set, ElementId x) {
    return std::binary_search(set.begin(), set.end(), x);
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.d_ == b.d_ && a.elements_ == b.elements_ && a.family_ == b.family_;
  }

 private:
  int d_ = 1;
  std::vector<Element> elements_;
  std::vector<Subset> family_;
  std::unordered_map<ElementId, std::size_t> position_;
};

/// A multiset of bought element copies.
struct Solution {
  std::map<ElementId, std::int64_t> copies;

  static Solution of(const std::vector<ElementId>& ids) {
    Solution s;
    for (ElementId x : ids) ++s.copies[x];
    return s;
  }

  std::int64_t count(ElementId x) const {
    auto it = copies.find(x);
    return it == copies.end() ? 0 : it->second;
  }

  std::int64_t size() const {
    std::int64_t total = 0;
    for (const auto& [x, c] : copies) total += c;
    return total;
  }

  std::int64_t weight(const Instance& inst) const {
    std::int64_t total = 0;
    for (const auto& [x, c] : copies) total += inst.element(x).weight * c;
    return total;
  }

  std::vector<ElementId> support() const {
    std::vector<ElementId> ids;
    for (const auto& [x, c] : copies) {
      if (c > 0) ids.push_back(x);
    }
    return ids;
  }

  bool operator==(const Solution&) const = default;
};

/// target[i] is the element covering set occurrence i.
struct Assignment {
  std::vector<ElementId> target;

  std::int64_t load(ElementId x) const {
    return static_cast<std::int64_t>(std::count(target.begin(), target.end(), x));
  }

  bool operator==(const Assignment&) const = default;
};

/// Sets grouped by their intersection with a reference set S.
struct EquivalenceClasses {
  Subset S;
  std::map<Subset, std::vector<SetIndex>> by_class;
};

/// Plurality function: class E -> the element of S credited with it.
using Plurality = std::map<Subset, ElementId>;

inline Subset make_subset(std::vector<ElementId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

inline Subset intersect(const Subset& a, const Subset& b) {
  Subset out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline EquivalenceClasses equivalence_classes(const Instance& inst, const Subset& S) {
  EquivalenceClasses classes;
  classes.S = make_subset(S);
  for (ElementId s : classes.S) {
    if (!inst.contains(s)) throw Error(ErrorKind::kUnknownElement, "S names unknown element " + std::to_string(s));
  }
  for (SetIndex i = 0; i < inst.m(); ++i) {
    classes.by_class[intersect(inst.family()[i], classes.S)].push_back(i);
  }
  return classes;
}

/// A_s for every s in S: the union of the classes that pi credits to s.
/// pi must cover every class present, except the class of sets avoiding an
/// empty S (there is no star to receive it).
inline std::map<ElementId, std::vector<SetIndex>> stars(const EquivalenceClasses& classes, const Plurality& pi) {
  std::map<ElementId, std::vector<SetIndex>> result;
  for (ElementId s : classes.S) result[s];
  for (const auto& [E, indices] : classes.by_class) {
    if (E.empty() && classes.S.empty()) continue;
    auto it = pi.find(E);
    if (it == pi.end()) throw Error(ErrorKind::kPartialPlurality, "plurality undefined on a class");
    auto star = result.find(it->second);
    if (star == result.end()) {
      throw Error(ErrorKind::kPreconditionViolated, "plurality maps outside S: " + std::to_string(it->second));
    }
    star->second.insert(star->second.end(), indices.begin(), indices.end());
  }
  for (auto& [s, indices] : result) std::sort(indices.begin(), indices.end());
  return result;
}

struct GenParams {
  std::int64_t n = 1;
  std::int64_t m = 1;
  int d = 1;
  std::pair<std::int64_t, std::int64_t> cap_range{1, 1};
  std::pair<std::int64_t, std::int64_t> weight_range{1, 1};
  std::pair<std::int64_t, std::int64_t> mult_range{1, 1};
};

/// Seeded random instance over ids 0..n-1. Each set is uniform among the
/// nonempty subsets of size <= d.
inline Instance generate_instance(const GenParams& p, std::uint64_t seed) {
  if (p.n < 1 || p.m < 1 || p.d < 1) throw Error(ErrorKind::kParameterViolation, "n, m, d must be positive");
  for (auto [lo, hi] : {p.cap_range, p.weight_range, p.mult_range}) {
    if (lo > hi) throw Error(ErrorKind::kParameterViolation, "empty range");
  }
  if (p.cap_range.first < 0 || p.weight_range.first < 0 || p.mult_range.first < 1) {
    throw Error(ErrorKind::kParameterViolation, "range below the legal minimum");
  }
  Rng rng(seed);
  std::vector<Element> elements;
  for (std::int64_t i = 0; i < p.n; ++i) {
    Element e;
    e.id = i;
    e.cap = rng.uniform(p.cap_range.first, p.cap_range.second);
    e.mult = rng.uniform(p.mult_range.first, p.mult_range.second);
    e.weight = rng.uniform(p.weight_range.first, p.weight_range.second);
    elements.push_back(e);
  }
  // Size s is drawn with probability C(n,s) / sum_t C(n,t), then a uniform s-subset.
  const std::int64_t max_size = std::min<std::int64_t>(p.d, p.n);
  std::vector<std::uint64_t> weights;
  std::uint64_t total = 0;
  {
    std::uint64_t c = 1;
    for (std::int64_t s = 1; s <= max_size; ++s) {
      c = c * static_cast<std::uint64_t>(p.n - s + 1) / static_cast<std::uint64_t>(s);
      weights.push_back(c);
      total += c;
    }
  }
  std::vector<Subset> family;
  for (std::int64_t j = 0; j < p.m; ++j) {
    std::uint64_t pick = rng.below(total);
    std::int64_t size = 1;
    for (std::uint64_t w : weights) {
      if (pick < w) break;
      pick -= w;
      ++size;
    }
    family.push_back(rng.subset(p.n, size));
  }
  return Instance(p.d, std::move(elements), std::move(family));
}

}  // namespace caphs
