#pragma once

// Assignment existence as integral max flow:
//   source -> set (1), set -> bought member (1), element -> sink (cap * copies).
// A valid assignment exists iff the max flow saturates every set.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "caphs/core.hpp"

namespace caphs {

class FlowNetwork {
 public:
  struct Arc {
    std::size_t from;
    std::size_t to;
    std::int64_t capacity;
  };

  FlowNetwork(std::size_t node_count, std::size_t source, std::size_t sink)
      : node_count_(node_count), source_(source), sink_(sink) {
    if (source >= node_count || sink >= node_count) throw std::out_of_range("terminal outside the node range");
  }

  std::size_t add_arc(std::size_t from, std::size_t to, std::int64_t capacity) {
    if (from >= node_count_ || to >= node_count_) throw std::out_of_range("arc endpoint outside the node range");
    if (capacity < 0) throw Error(ErrorKind::kPreconditionViolated, "negative arc capacity");
    arcs_.push_back({from, to, capacity});
    return arcs_.size() - 1;
  }

  std::size_t node_count() const { return node_count_; }
  std::size_t source() const { return source_; }
  std::size_t sink() const { return sink_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

 private:
  std::size_t node_count_;
  std::size_t source_;
  std::size_t sink_;
  std::vector<Arc> arcs_;
};

struct FlowResult {
  std::int64_t value = 0;
  /// Flow on each arc, indexed like FlowNetwork::arcs().
  std::vector<std::int64_t> flow;
};

/// Dinic's algorithm. Arcs are scanned in insertion order, so the flow found
/// is a deterministic function of the network.
inline FlowResult max_flow(const FlowNetwork& net) {
  struct Edge {
    std::size_t to;
    std::int64_t residual;
  };
  const std::size_t n = net.node_count();
  std::vector<Edge> edges;
  std::vector<std::vector<std::size_t>> out(n);
  edges.reserve(net.arcs().size() * 2);
  for (const auto& arc : net.arcs()) {
    out[arc.from].push_back(edges.size());
    edges.push_back({arc.to, arc.capacity});
    out[arc.to].push_back(edges.size());
    edges.push_back({arc.from, 0});
  }

  const std::size_t s = net.source();
  const std::size_t t = net.sink();
  std::int64_t value = 0;
  if (s != t) {
    std::vector<int> level(n);
    std::vector<std::size_t> next(n);
    auto bfs = [&] {
      std::fill(level.begin(), level.end(), -1);
      std::queue<std::size_t> q;
      level[s] = 0;
      q.push(s);
      while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t e : out[u]) {
          if (edges[e].residual > 0 && level[edges[e].to] < 0) {
            level[edges[e].to] = level[u] + 1;
            q.push(edges[e].to);
          }
        }
      }
      return level[t] >= 0;
    };
    // Iterative blocking-flow DFS.
    auto push = [&](std::int64_t limit) -> std::int64_t {
      std::vector<std::size_t> path;
      std::size_t u = s;
      while (true) {
        if (u == t) {
          std::int64_t bottleneck = limit;
          for (std::size_t e : path) bottleneck = std::min(bottleneck, edges[e].residual);
          for (std::size_t e : path) {
            edges[e].residual -= bottleneck;
            edges[e ^ 1].residual += bottleneck;
          }
          return bottleneck;
        }
        bool advanced = false;
        for (; next[u] < out[u].size(); ++next[u]) {
          const std::size_t e = out[u][next[u]];
          const std::size_t v = edges[e].to;
          if (edges[e].residual > 0 && level[v] == level[u] + 1) {
            path.push_back(e);
            u = v;
            advanced = true;
            break;
          }
        }
        if (!advanced) {
          if (path.empty()) return 0;
          level[u] = -1;  // dead end
          const std::size_t e = path.back();
          path.pop_back();
          u = edges[e ^ 1].to;
          ++next[u];
        }
      }
    };
    while (bfs()) {
      std::fill(next.begin(), next.end(), 0);
      while (std::int64_t pushed = push(std::numeric_limits<std::int64_t>::max())) value += pushed;
    }
  }

  FlowResult result;
  result.value = value;
  result.flow.reserve(net.arcs().size());
  for (std::size_t a = 0; a < net.arcs().size(); ++a) result.flow.push_back(edges[2 * a + 1].residual);
  return result;
}

/// Membership and load invariants of an assignment against a solution.
inline bool is_valid_assignment(const Instance& inst, const Solution& sol, const Assignment& asg) {
  if (asg.target.size() != inst.m()) return false;
  std::map<ElementId, std::int64_t> load;
  for (SetIndex i = 0; i < inst.m(); ++i) {
    const ElementId x = asg.target[i];
    if (!Instance::set_contains(inst.family()[i], x)) return false;
    ++load[x];
  }
  for (const auto& [x, l] : load) {
    if (!inst.contains(x)) return false;
    const std::int64_t copies = sol.count(x);
    if (copies <= 0) return false;
    if (l > inst.element(x).cap * copies) return false;
  }
  return true;
}

namespace detail {

inline void check_solution_against(const Instance& inst, const Solution& sol) {
  for (const auto& [x, c] : sol.copies) {
    if (!inst.contains(x)) throw Error(ErrorKind::kUnknownElement, "solution names unknown element " + std::to_string(x));
    if (c < 1) throw Error(ErrorKind::kPreconditionViolated, "copy counts must be positive");
    const auto& mult = inst.element(x).mult;
    if (mult && c > *mult) {
      throw Error(ErrorKind::kPreconditionViolated, "element " + std::to_string(x) + " bought beyond its multiplicity");
    }
  }
}

/// cap * copies, saturated at m (no element can absorb more than every set).
inline std::int64_t effective_capacity(std::int64_t cap, std::int64_t copies, std::size_t m) {
  const auto limit = static_cast<std::int64_t>(m);
  if (cap == 0 || copies == 0) return 0;
  if (cap >= limit || copies >= limit) return limit;
  return std::min(limit, cap * copies);
}

}  // namespace detail

inline std::optional<Assignment> check_feasible(const Instance& inst, const Solution& sol) {
  detail::check_solution_against(inst, sol);
  const std::size_t m = inst.m();
  const std::vector<ElementId> bought = sol.support();  // ascending id
  constexpr std::size_t kSource = 0;
  constexpr std::size_t kSink = 1;
  auto set_node = [](SetIndex i) { return 2 + i; };
  auto element_node = [&](std::size_t j) { return 2 + m + j; };

  FlowNetwork net(2 + m + bought.size(), kSource, kSink);
  for (SetIndex i = 0; i < m; ++i) net.add_arc(kSource, set_node(i), 1);
  std::vector<std::pair<std::size_t, ElementId>> member_arcs;  // (arc id, element)
  std::vector<std::size_t> arc_owner;
  for (SetIndex i = 0; i < m; ++i) {
    for (ElementId x : inst.family()[i]) {
      auto it = std::lower_bound(bought.begin(), bought.end(), x);
      if (it == bought.end() || *it != x) continue;
      const auto j = static_cast<std::size_t>(it - bought.begin());
      member_arcs.push_back({net.add_arc(set_node(i), element_node(j), 1), x});
      arc_owner.push_back(i);
    }
  }
  for (std::size_t j = 0; j < bought.size(); ++j) {
    const Element& e = inst.element(bought[j]);
    net.add_arc(element_node(j), kSink, detail::effective_capacity(e.cap, sol.count(e.id), m));
  }

  const FlowResult flow = max_flow(net);
  if (flow.value < static_cast<std::int64_t>(m)) return std::nullopt;

  Assignment asg;
  asg.target.assign(m, -1);
  for (std::size_t a = 0; a < member_arcs.size(); ++a) {
    if (flow.flow[member_arcs[a].first] > 0) asg.target[arc_owner[a]] = member_arcs[a].second;
  }
  if (!is_valid_assignment(inst, sol, asg)) throw std::logic_error("flow produced an invalid assignment");
  return asg;
}

inline constexpr std::size_t kDefaultOracleSetCap = 12;

/// Exhaustive search over membership-respecting target maps. Independent of
/// the flow formulation; used as its oracle.
inline std::optional<Assignment> brute_force_assignment(const Instance& inst, const Solution& sol,
                                                        std::size_t max_sets = kDefaultOracleSetCap) {
  detail::check_solution_against(inst, sol);
  if (inst.m() > max_sets) {
    throw Error(ErrorKind::kOracleTooLarge, "brute-force oracle limited to " + std::to_string(max_sets) + " sets");
  }
  std::map<ElementId, std::int64_t> remaining;
  for (const auto& [x, c] : sol.copies) remaining[x] = inst.element(x).cap * c;
  Assignment asg;
  asg.target.assign(inst.m(), -1);

  auto search = [&](auto&& self, SetIndex i) -> bool {
    if (i == inst.m()) return true;
    for (ElementId x : inst.family()[i]) {
      auto it = remaining.find(x);
      if (it == remaining.end() || it->second == 0) continue;
      --it->second;
      asg.target[i] = x;
      if (self(self, i + 1)) return true;
      ++it->second;
    }
    return false;
  };
  if (!search(search, 0)) return std::nullopt;
  return asg;
}

/// cov(x, indices): how many of the given sets the assignment sends to x.
inline std::int64_t coverage(const Assignment& asg, ElementId x, std::span<const SetIndex> indices) {
  std::int64_t count = 0;
  for (SetIndex i : indices) {
    if (i < asg.target.size() && asg.target[i] == x) ++count;
  }
  return count;
}

}  // namespace caphs
