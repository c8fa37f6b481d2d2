#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srcest/errors.hpp"
#include "srcest/graph.hpp"

namespace srcest {

// The explicit-node set V_e: sorted, duplicate-free, non-empty.
class ObservationSet {
 public:
  ObservationSet() = default;
  ObservationSet(std::initializer_list<NodeId> nodes)
      : ObservationSet(std::vector<NodeId>(nodes)) {}
  explicit ObservationSet(std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  }

  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeId u) const { return std::binary_search(nodes_.begin(), nodes_.end(), u); }
  std::span<const NodeId> nodes() const { return nodes_; }
  auto begin() const { return nodes_.begin(); }
  auto end() const { return nodes_.end(); }

  // Throws unless the set is non-empty and every id is valid in g.
  void check_against(const Graph& g) const {
    if (nodes_.empty()) throw ArgumentError("observation set is empty");
    for (NodeId u : nodes_) g.check_node(u);
  }

  std::vector<char> mask(std::size_t node_count) const {
    std::vector<char> m(node_count, 0);
    for (NodeId u : nodes_) m[static_cast<std::size_t>(u)] = 1;
    return m;
  }

  friend bool operator==(const ObservationSet&, const ObservationSet&) = default;

 private:
  std::vector<NodeId> nodes_;
};

// A tree over a subset ("members") of a node universe 0..n-1. Children are
// kept in ascending id order.
class RootedTree {
 public:
  RootedTree() = default;

  // parent[u] is kNoNode for the root and for non-members.
  static RootedTree from_parents(NodeId root, std::vector<NodeId> parent,
                                 std::vector<char> member) {
    const std::size_t n = parent.size();
    if (member.size() != n) throw ArgumentError("parent/member size mismatch");
    if (root < 0 || static_cast<std::size_t>(root) >= n || !member[static_cast<std::size_t>(root)]) {
      throw ValidationError("root is not a member of the tree");
    }
    if (parent[static_cast<std::size_t>(root)] != kNoNode) {
      throw ValidationError("root has a parent");
    }
    RootedTree t;
    t.root_ = root;
    t.child_start_.assign(n + 1, 0);
    std::size_t members = 0;
    for (std::size_t u = 0; u < n; ++u) {
      if (!member[u]) continue;
      ++members;
      if (static_cast<NodeId>(u) == root) continue;
      const NodeId p = parent[u];
      if (p == kNoNode) throw ValidationError("node " + std::to_string(u) + " has no parent but is not the root");
      if (p < 0 || static_cast<std::size_t>(p) >= n || !member[static_cast<std::size_t>(p)]) {
        throw ValidationError("parent of node " + std::to_string(u) + " is not a member");
      }
      ++t.child_start_[static_cast<std::size_t>(p) + 1];
    }
    for (std::size_t u = 0; u < n; ++u) t.child_start_[u + 1] += t.child_start_[u];
    // Filled in ascending id order, so each child list stays sorted.
    t.child_list_.resize(t.child_start_[n]);
    std::vector<std::size_t> fill(t.child_start_.begin(), t.child_start_.end() - 1);
    for (std::size_t u = 0; u < n; ++u) {
      if (member[u] && static_cast<NodeId>(u) != root) {
        t.child_list_[fill[static_cast<std::size_t>(parent[u])]++] = static_cast<NodeId>(u);
      }
    }
    t.preorder_.reserve(members);
    t.preorder_.push_back(root);
    for (std::size_t head = 0; head < t.preorder_.size(); ++head) {
      for (NodeId c : t.children(t.preorder_[head])) t.preorder_.push_back(c);
    }
    if (t.preorder_.size() != members) {
      throw ValidationError("parent pointers contain a cycle detached from the root");
    }
    t.parent_ = std::move(parent);
    t.member_ = std::move(member);
    return t;
  }

  static RootedTree from_parents(NodeId root, std::vector<NodeId> parent) {
    std::vector<char> member(parent.size(), 1);
    return from_parents(root, std::move(parent), std::move(member));
  }

  NodeId root() const { return root_; }
  std::size_t universe_size() const { return parent_.size(); }
  std::size_t size() const { return preorder_.size(); }
  bool contains(NodeId u) const {
    return u >= 0 && static_cast<std::size_t>(u) < member_.size() && member_[static_cast<std::size_t>(u)];
  }
  NodeId parent(NodeId u) const { return parent_[static_cast<std::size_t>(u)]; }
  std::span<const NodeId> children(NodeId u) const {
    const auto i = static_cast<std::size_t>(u);
    return {child_list_.data() + child_start_[i], child_list_.data() + child_start_[i + 1]};
  }
  bool is_leaf(NodeId u) const { return children(u).empty(); }

  // Members in BFS order from the root; every parent precedes its children.
  const std::vector<NodeId>& preorder() const { return preorder_; }
  const std::vector<NodeId>& parents() const { return parent_; }
  const std::vector<char>& members() const { return member_; }

  // Degree within the tree (children plus the parent edge).
  std::size_t degree(NodeId u) const { return children(u).size() + (u == root_ ? 0 : 1); }

  Graph as_graph() const {
    std::vector<Edge> edges;
    for (NodeId u : preorder_) {
      if (u != root_) edges.emplace_back(parent(u), u);
    }
    return Graph::from_edges(universe_size(), edges);
  }

 private:
  NodeId root_ = kNoNode;
  std::vector<NodeId> parent_;
  std::vector<char> member_;
  std::vector<std::size_t> child_start_;  // children of u: child_list_[child_start_[u], child_start_[u+1])
  std::vector<NodeId> child_list_;
  std::vector<NodeId> preorder_;
};

// Roots the component of g containing `root`. Throws StructureError when that
// component has a cycle.
inline RootedTree root_tree(const Graph& g, NodeId root) {
  if (!component_is_tree(g, root)) {
    throw StructureError("component of node " + std::to_string(root) + " is not a tree");
  }
  const BfsTree bfs = bfs_tree(g, root);
  std::vector<char> member(g.node_count(), 0);
  for (NodeId u : bfs.order) member[static_cast<std::size_t>(u)] = 1;
  return RootedTree::from_parents(root, bfs.parent, std::move(member));
}

// D_T(u): height of the subtree rooted at u; 0 for leaves and non-members.
inline std::vector<int> subtree_heights(const RootedTree& t) {
  std::vector<int> height(t.universe_size(), 0);
  const auto& order = t.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId u = *it;
    if (u == t.root()) continue;
    auto& hp = height[static_cast<std::size_t>(t.parent(u))];
    hp = std::max(hp, height[static_cast<std::size_t>(u)] + 1);
  }
  return height;
}

// Depth of every member below the root; 0 for non-members.
inline std::vector<int> tree_depths(const RootedTree& t) {
  std::vector<int> depth(t.universe_size(), 0);
  for (NodeId u : t.preorder()) {
    if (u != t.root()) depth[static_cast<std::size_t>(u)] = depth[static_cast<std::size_t>(t.parent(u))] + 1;
  }
  return depth;
}

// d̄(v, V_e) = max_{u in V_e} d(v, u).
inline int infection_range(const Graph& g, NodeId v, const ObservationSet& ve) {
  g.check_node(v);
  ve.check_against(g);
  const DistanceMap d = bfs_distances(g, v);
  int range = 0;
  for (NodeId u : ve) {
    if (d[u] == kInfiniteDistance) {
      throw UnreachableError("explicit node " + std::to_string(u) + " unreachable from " +
                             std::to_string(v));
    }
    range = std::max(range, d[u]);
  }
  return range;
}

// Infection range of every node at once (one BFS per explicit node).
// Nodes that cannot reach all of V_e get kInfiniteDistance.
inline std::vector<int> infection_ranges(const Graph& g, const ObservationSet& ve) {
  ve.check_against(g);
  std::vector<int> range(g.node_count(), 0);
  for (NodeId e : ve) {
    const DistanceMap d = bfs_distances(g, e);
    for (std::size_t u = 0; u < range.size(); ++u) range[u] = std::max(range[u], d.dist[u]);
  }
  return range;
}

// The unique minimal connected subtree of a tree containing `nodes`.
inline Subgraph minimal_spanning_subtree(const Graph& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) throw ArgumentError("minimal spanning subtree of an empty node set");
  for (NodeId u : nodes) g.check_node(u);
  const NodeId anchor = nodes.front();
  if (!component_is_tree(g, anchor)) {
    throw StructureError("minimal spanning subtree requires a tree");
  }
  const BfsTree bfs = bfs_tree(g, anchor);
  std::vector<char> keep(g.node_count(), 0);
  std::vector<NodeId> kept;
  std::vector<Edge> edges;
  keep[static_cast<std::size_t>(anchor)] = 1;
  kept.push_back(anchor);
  for (NodeId u : nodes) {
    if (bfs.dist[static_cast<std::size_t>(u)] == kInfiniteDistance) {
      throw StructureError("nodes " + std::to_string(anchor) + " and " + std::to_string(u) +
                           " lie in different components");
    }
    for (NodeId x = u; !keep[static_cast<std::size_t>(x)]; x = bfs.parent[static_cast<std::size_t>(x)]) {
      keep[static_cast<std::size_t>(x)] = 1;
      kept.push_back(x);
      edges.emplace_back(x, bfs.parent[static_cast<std::size_t>(x)]);
    }
  }
  return Subgraph::build(g.node_count(), std::move(kept), edges);
}

inline Subgraph minimal_spanning_subtree(const Graph& g, const ObservationSet& nodes) {
  return minimal_spanning_subtree(g, nodes.nodes());
}

// T_u(v; g): nodes on u's side after cutting the first edge of the u->v path.
// Sorted ascending.
inline std::vector<NodeId> subtree_without_link(const Graph& g, NodeId u, NodeId v) {
  g.check_node(u);
  g.check_node(v);
  if (u == v) throw ArgumentError("subtree_without_link needs u != v");
  if (!component_is_tree(g, u)) throw StructureError("subtree_without_link requires a tree");
  const BfsTree from_v = bfs_tree(g, v);
  if (from_v.dist[static_cast<std::size_t>(u)] == kInfiniteDistance) {
    throw StructureError("nodes " + std::to_string(u) + " and " + std::to_string(v) + " are disconnected");
  }
  // In the tree rooted at v, T_u(v) is exactly u's descendant set.
  std::vector<NodeId> out{u};
  for (std::size_t head = 0; head < out.size(); ++head) {
    const NodeId x = out[head];
    for (NodeId w : g.neighbors(x)) {
      if (w != from_v.parent[static_cast<std::size_t>(x)]) out.push_back(w);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace srcest
