#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "srcest/errors.hpp"
#include "srcest/general_estimator.hpp"
#include "srcest/graph.hpp"
#include "srcest/trees.hpp"

// The mixed-integer quadratically constrained program whose optimum is the
// spanning-tree objective F of a candidate subgraph. Binary E_ij selects the
// directed edge i -> j (i the parent); integer D_i stands for the height of i.
// All ids are global node ids.

namespace srcest {

struct MiqcqpInstance {
  struct LinearTerm {
    NodeId node = kNoNode;
    int coef = 0;
    friend bool operator==(const LinearTerm&, const LinearTerm&) = default;
  };
  struct Incoming {
    NodeId node = kNoNode;
    int rhs = 0;
    friend bool operator==(const Incoming&, const Incoming&) = default;
  };
  struct UpperBound {
    NodeId node = kNoNode;
    std::vector<NodeId> terms;  // D_node <= sum over j of (D_j + 1) E_node,j
    friend bool operator==(const UpperBound&, const UpperBound&) = default;
  };

  NodeId center = kNoNode;
  std::vector<NodeId> nodes;
  std::vector<Edge> directed_edges;
  std::vector<Edge> bilinear;       // E_ij * D_i
  std::vector<LinearTerm> linear;   // coef * D_node
  std::vector<Incoming> incoming;   // sum over j of E_j,node = rhs
  int total_edges = 0;
  std::vector<Edge> height_lb;      // D_i >= (D_j + 1) E_ij
  std::vector<UpperBound> height_ub;
  int d_max = 0;

  friend bool operator==(const MiqcqpInstance&, const MiqcqpInstance&) = default;
};

inline MiqcqpInstance export_miqcqp(const CandidateSubgraph& c) {
  const Graph& h = c.h.graph;
  MiqcqpInstance m;
  m.center = c.center;
  m.nodes = c.h.to_global;
  for (NodeId i = 0; static_cast<std::size_t>(i) < h.node_count(); ++i) {
    const NodeId gi = c.h.global(i);
    MiqcqpInstance::UpperBound ub{gi, {}};
    for (NodeId j : h.neighbors(i)) {
      const NodeId gj = c.h.global(j);
      m.directed_edges.emplace_back(gi, gj);
      m.bilinear.emplace_back(gi, gj);
      m.height_lb.emplace_back(gi, gj);
      ub.terms.push_back(gj);
    }
    m.height_ub.push_back(std::move(ub));
    if (gi != c.center) m.linear.push_back({gi, -1});
    m.incoming.push_back({gi, gi == c.center ? 0 : 1});
  }
  m.total_edges = static_cast<int>(h.node_count()) - 1;
  m.d_max = static_cast<int>(h.node_count());
  return m;
}

inline void to_json(nlohmann::json& j, const MiqcqpInstance& m) {
  using nlohmann::json;
  json linear = json::array();
  for (const auto& t : m.linear) linear.push_back({{"node", t.node}, {"coef", t.coef}});
  json incoming = json::array();
  for (const auto& c : m.incoming) incoming.push_back({{"node", c.node}, {"rhs", c.rhs}});
  json ub = json::array();
  for (const auto& c : m.height_ub) {
    json terms = json::array();
    for (NodeId t : c.terms) terms.push_back(json::array({t}));
    ub.push_back({{"node", c.node}, {"terms", std::move(terms)}});
  }
  auto pairs = [](const std::vector<Edge>& es) {
    json a = json::array();
    for (auto [x, y] : es) a.push_back(json::array({x, y}));
    return a;
  };
  j = {{"center", m.center},
       {"nodes", m.nodes},
       {"directed_edges", pairs(m.directed_edges)},
       {"objective", {{"bilinear", pairs(m.bilinear)}, {"linear", std::move(linear)}}},
       {"constraints",
        {{"incoming", std::move(incoming)},
         {"total_edges", m.total_edges},
         {"height_lb", pairs(m.height_lb)},
         {"height_ub", std::move(ub)}}},
       {"bounds", {{"D_max", m.d_max}}}};
}

inline void from_json(const nlohmann::json& j, MiqcqpInstance& m) {
  auto pairs = [](const nlohmann::json& a) {
    std::vector<Edge> es;
    for (const auto& p : a) es.emplace_back(p.at(0).get<NodeId>(), p.at(1).get<NodeId>());
    return es;
  };
  m = MiqcqpInstance{};
  m.center = j.at("center").get<NodeId>();
  m.nodes = j.at("nodes").get<std::vector<NodeId>>();
  m.directed_edges = pairs(j.at("directed_edges"));
  const auto& obj = j.at("objective");
  m.bilinear = pairs(obj.at("bilinear"));
  for (const auto& t : obj.at("linear")) m.linear.push_back({t.at("node").get<NodeId>(), t.at("coef").get<int>()});
  const auto& cons = j.at("constraints");
  for (const auto& c : cons.at("incoming")) m.incoming.push_back({c.at("node").get<NodeId>(), c.at("rhs").get<int>()});
  m.total_edges = cons.at("total_edges").get<int>();
  m.height_lb = pairs(cons.at("height_lb"));
  for (const auto& c : cons.at("height_ub")) {
    MiqcqpInstance::UpperBound ub{c.at("node").get<NodeId>(), {}};
    for (const auto& t : c.at("terms")) ub.terms.push_back(t.at(0).get<NodeId>());
    m.height_ub.push_back(std::move(ub));
  }
  m.d_max = j.at("bounds").at("D_max").get<int>();
}

// An assignment: parent[i] is the unique j with E_ji = 1 (kNoNode for the
// center); height[i] is D_i. Indexed by position in `nodes`.
struct MiqcqpAssignment {
  std::vector<int> parent;
  std::vector<int> height;
};

struct MiqcqpEnumeration {
  std::size_t feasible_trees = 0;        // edge selections admitting some D
  std::size_t feasible_assignments = 0;  // (E, D) pairs
  long long best_objective = std::numeric_limits<long long>::max();
  MiqcqpAssignment best;
  // Some feasible D differs from the true heights of its tree.
  bool heights_loose = false;
};

// Exhaustive search over all feasible (E, D) with 0 <= D <= D_max. Every
// non-center node picks exactly one parent among its neighbors, which covers
// the incoming-edge and total-edge constraints; cyclic choices violate the
// height lower bounds and are skipped.
inline MiqcqpEnumeration enumerate_miqcqp(const MiqcqpInstance& m) {
  const std::size_t n = m.nodes.size();
  auto pos = [&](NodeId u) {
    const auto it = std::lower_bound(m.nodes.begin(), m.nodes.end(), u);
    if (it == m.nodes.end() || *it != u) throw ValidationError("instance references unknown node " + std::to_string(u));
    return static_cast<int>(it - m.nodes.begin());
  };
  std::vector<std::vector<int>> nbrs(n);
  for (auto [a, b] : m.directed_edges) nbrs[static_cast<std::size_t>(pos(b))].push_back(pos(a));
  const int root = pos(m.center);

  // Linear coefficients; the bilinear part contributes D_i once per child.
  std::vector<int> coef(n, 0);
  for (const auto& t : m.linear) coef[static_cast<std::size_t>(pos(t.node))] += t.coef;

  MiqcqpEnumeration out;
  std::vector<int> parent(n, -1);
  std::vector<std::vector<int>> children(n);
  std::vector<int> postorder;
  std::vector<int> height(n, 0);
  std::vector<int> true_height(n, 0);

  // Enumerate D in post-order; each node's range depends on its children.
  std::function<void(std::size_t, long long)> assign_heights = [&](std::size_t k, long long partial) {
    if (k == postorder.size()) {
      ++out.feasible_assignments;
      if (height != true_height) out.heights_loose = true;
      if (partial < out.best_objective) {
        out.best_objective = partial;
        out.best = {parent, height};
      }
      return;
    }
    const int i = postorder[k];
    int lo = 0;
    long long hi = 0;
    for (int c : children[static_cast<std::size_t>(i)]) {
      lo = std::max(lo, height[static_cast<std::size_t>(c)] + 1);
      hi += height[static_cast<std::size_t>(c)] + 1;
    }
    hi = std::min<long long>(hi, m.d_max);
    const long long weight = static_cast<long long>(children[static_cast<std::size_t>(i)].size()) +
                             coef[static_cast<std::size_t>(i)];
    for (int d = lo; d <= hi; ++d) {
      height[static_cast<std::size_t>(i)] = d;
      assign_heights(k + 1, partial + weight * d);
    }
    height[static_cast<std::size_t>(i)] = 0;
  };

  auto evaluate_tree = [&] {
    for (auto& c : children) c.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (parent[i] >= 0) children[static_cast<std::size_t>(parent[i])].push_back(static_cast<int>(i));
    }
    std::vector<int> order{root};
    for (std::size_t head = 0; head < order.size(); ++head) {
      for (int c : children[static_cast<std::size_t>(order[head])]) order.push_back(c);
    }
    if (order.size() != n) return;  // a cycle: no finite D satisfies the lower bounds
    postorder.assign(order.rbegin(), order.rend());
    std::fill(true_height.begin(), true_height.end(), 0);
    for (int i : postorder) {
      if (parent[static_cast<std::size_t>(i)] >= 0) {
        auto& hp = true_height[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
        hp = std::max(hp, true_height[static_cast<std::size_t>(i)] + 1);
      }
    }
    const std::size_t before = out.feasible_assignments;
    assign_heights(0, 0);
    if (out.feasible_assignments > before) ++out.feasible_trees;
  };

  std::function<void(std::size_t)> choose_parents = [&](std::size_t i) {
    if (i == n) {
      evaluate_tree();
      return;
    }
    if (static_cast<int>(i) == root) {
      choose_parents(i + 1);
      return;
    }
    for (int j : nbrs[i]) {
      parent[i] = j;
      choose_parents(i + 1);
    }
    parent[i] = -1;
  };
  choose_parents(0);
  return out;
}

// Objective of an assignment: sum of E_ij D_i minus sum over non-center D_i.
inline long long miqcqp_objective(const MiqcqpInstance& m, const MiqcqpAssignment& a) {
  long long total = 0;
  for (std::size_t i = 0; i < a.parent.size(); ++i) {
    if (a.parent[i] >= 0) total += a.height[static_cast<std::size_t>(a.parent[i])];
  }
  for (const auto& t : m.linear) {
    const auto it = std::lower_bound(m.nodes.begin(), m.nodes.end(), t.node);
    total += static_cast<long long>(t.coef) * a.height[static_cast<std::size_t>(it - m.nodes.begin())];
  }
  return total;
}

// The spanning tree selected by an assignment, as an infection tree over the
// instance's nodes (local ids = positions in `nodes`).
inline InfectionTree miqcqp_tree(const MiqcqpInstance& m, const MiqcqpAssignment& a) {
  std::vector<NodeId> parent(a.parent.begin(), a.parent.end());
  for (auto& p : parent) {
    if (p < 0) p = kNoNode;
  }
  const auto root = static_cast<NodeId>(std::lower_bound(m.nodes.begin(), m.nodes.end(), m.center) - m.nodes.begin());
  return InfectionTree::make(RootedTree::from_parents(root, std::move(parent)), m.nodes);
}

}  // namespace srcest
