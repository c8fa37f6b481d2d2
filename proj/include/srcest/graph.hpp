#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "srcest/errors.hpp"

namespace srcest {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;
inline constexpr int kInfiniteDistance = std::numeric_limits<int>::max();

using Edge = std::pair<NodeId, NodeId>;

// Immutable undirected simple graph over dense ids 0..n-1, stored as CSR.
// Neighbor lists are sorted ascending, which fixes the visiting order of
// every traversal built on top of it.
class Graph {
 public:
  Graph() = default;

  // Builds a graph from an edge list. Duplicate edges (in either orientation)
  // are merged; self-loops and out-of-range ids are rejected.
  static Graph from_edges(std::size_t node_count, std::span<const Edge> edges) {
    std::vector<Edge> normalized;
    normalized.reserve(edges.size());
    for (auto [a, b] : edges) {
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= node_count ||
          static_cast<std::size_t>(b) >= node_count) {
        throw ArgumentError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") references a node outside 0.." +
                            std::to_string(node_count) + ")");
      }
      if (a == b) {
        throw ArgumentError("self-loop on node " + std::to_string(a));
      }
      normalized.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(normalized.begin(), normalized.end());
    normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());

    Graph g;
    g.offsets_.assign(node_count + 1, 0);
    for (auto [a, b] : normalized) {
      ++g.offsets_[static_cast<std::size_t>(a) + 1];
      ++g.offsets_[static_cast<std::size_t>(b) + 1];
    }
    for (std::size_t i = 0; i < node_count; ++i) g.offsets_[i + 1] += g.offsets_[i];
    g.targets_.resize(g.offsets_.back());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [a, b] : normalized) {
      g.targets_[cursor[static_cast<std::size_t>(a)]++] = b;
      g.targets_[cursor[static_cast<std::size_t>(b)]++] = a;
    }
    for (std::size_t u = 0; u < node_count; ++u) {
      std::sort(g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]),
                g.targets_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]));
    }
    g.edge_count_ = normalized.size();
    return g;
  }

  std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return edge_count_; }

  bool valid(NodeId u) const {
    return u >= 0 && static_cast<std::size_t>(u) < node_count();
  }

  std::span<const NodeId> neighbors(NodeId u) const {
    const auto i = static_cast<std::size_t>(u);
    return {targets_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  std::size_t degree(NodeId u) const { return neighbors(u).size(); }

  bool has_edge(NodeId a, NodeId b) const {
    auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  // Each undirected edge once, as (smaller, larger), in ascending order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId u = 0; static_cast<std::size_t>(u) < node_count(); ++u) {
      for (NodeId w : neighbors(u)) {
        if (u < w) out.emplace_back(u, w);
      }
    }
    return out;
  }

  void check_node(NodeId u) const {
    if (!valid(u)) {
      throw ArgumentError("invalid node id " + std::to_string(u) + " (graph has " +
                          std::to_string(node_count()) + " nodes)");
    }
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
  std::size_t edge_count_ = 0;
};

// A graph over a subset of a parent graph's nodes. Local ids follow the
// ascending order of the global ids, so lowest-id tie-breaks agree in both
// id spaces.
struct Subgraph {
  Graph graph;
  std::vector<NodeId> to_global;  // local -> global
  std::vector<NodeId> to_local;   // global -> local, kNoNode when absent

  // `nodes` and `edges` are in global ids; every edge endpoint must be listed
  // in `nodes`.
  static Subgraph build(std::size_t parent_node_count, std::vector<NodeId> nodes,
                        std::span<const Edge> edges) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    Subgraph s;
    s.to_local.assign(parent_node_count, kNoNode);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      s.to_local[static_cast<std::size_t>(nodes[i])] = static_cast<NodeId>(i);
    }
    std::vector<Edge> local_edges;
    local_edges.reserve(edges.size());
    for (auto [a, b] : edges) {
      const NodeId la = s.to_local[static_cast<std::size_t>(a)];
      const NodeId lb = s.to_local[static_cast<std::size_t>(b)];
      if (la == kNoNode || lb == kNoNode) {
        throw InternalError("subgraph edge endpoint missing from node set");
      }
      local_edges.emplace_back(la, lb);
    }
    s.graph = Graph::from_edges(nodes.size(), local_edges);
    s.to_global = std::move(nodes);
    return s;
  }

  std::size_t size() const { return to_global.size(); }
  bool contains(NodeId global) const {
    return global >= 0 && static_cast<std::size_t>(global) < to_local.size() &&
           to_local[static_cast<std::size_t>(global)] != kNoNode;
  }
  NodeId local(NodeId global) const { return to_local[static_cast<std::size_t>(global)]; }
  NodeId global(NodeId local) const { return to_global[static_cast<std::size_t>(local)]; }

  // Global-id edges of the subgraph.
  std::vector<Edge> global_edges() const {
    std::vector<Edge> out;
    for (auto [a, b] : graph.edges()) out.emplace_back(global(a), global(b));
    return out;
  }
};

struct DistanceMap {
  NodeId source = kNoNode;
  std::vector<int> dist;  // kInfiniteDistance when unreachable

  int operator[](NodeId u) const { return dist[static_cast<std::size_t>(u)]; }
};

// Hop distances from v. Neighbors are expanded in ascending id order.
inline DistanceMap bfs_distances(const Graph& g, NodeId v) {
  g.check_node(v);
  DistanceMap out{v, std::vector<int>(g.node_count(), kInfiniteDistance)};
  std::vector<NodeId> queue;
  queue.reserve(g.node_count());
  out.dist[static_cast<std::size_t>(v)] = 0;
  queue.push_back(v);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId u = queue[head];
    const int du = out.dist[static_cast<std::size_t>(u)];
    for (NodeId w : g.neighbors(u)) {
      auto& dw = out.dist[static_cast<std::size_t>(w)];
      if (dw == kInfiniteDistance) {
        dw = du + 1;
        queue.push_back(w);
      }
    }
  }
  return out;
}

// Deterministic shortest-path tree: each node's parent is the first node that
// discovers it in a FIFO BFS with ascending neighbor order.
struct BfsTree {
  NodeId root = kNoNode;
  std::vector<NodeId> parent;  // kNoNode for the root and for unreached nodes
  std::vector<int> dist;
  std::vector<NodeId> order;   // visiting order, root first
};

inline BfsTree bfs_tree(const Graph& g, NodeId v) {
  g.check_node(v);
  BfsTree t;
  t.root = v;
  t.parent.assign(g.node_count(), kNoNode);
  t.dist.assign(g.node_count(), kInfiniteDistance);
  t.order.reserve(g.node_count());
  t.dist[static_cast<std::size_t>(v)] = 0;
  t.order.push_back(v);
  for (std::size_t head = 0; head < t.order.size(); ++head) {
    const NodeId u = t.order[head];
    for (NodeId w : g.neighbors(u)) {
      const auto wi = static_cast<std::size_t>(w);
      if (t.dist[wi] == kInfiniteDistance) {
        t.dist[wi] = t.dist[static_cast<std::size_t>(u)] + 1;
        t.parent[wi] = u;
        t.order.push_back(w);
      }
    }
  }
  return t;
}

// Nodes in the connected component of v, ascending.
inline std::vector<NodeId> component_of(const Graph& g, NodeId v) {
  auto order = bfs_tree(g, v).order;
  std::sort(order.begin(), order.end());
  return order;
}

inline bool is_connected(const Graph& g) {
  if (g.node_count() == 0) return true;
  return bfs_tree(g, 0).order.size() == g.node_count();
}

inline bool is_tree(const Graph& g) {
  return g.node_count() > 0 && g.edge_count() + 1 == g.node_count() && is_connected(g);
}

// True when the component containing v is acyclic.
inline bool component_is_tree(const Graph& g, NodeId v) {
  const auto nodes = bfs_tree(g, v).order;
  std::size_t degree_sum = 0;
  for (NodeId u : nodes) degree_sum += g.degree(u);
  return degree_sum / 2 + 1 == nodes.size();
}

// String labels <-> dense ids. Ids are assigned in order of first appearance.
class LabelTable {
 public:
  NodeId intern(const std::string& label) {
    auto [it, inserted] = ids_.try_emplace(label, static_cast<NodeId>(labels_.size()));
    if (inserted) labels_.push_back(label);
    return it->second;
  }

  NodeId id(const std::string& label) const {
    auto it = ids_.find(label);
    if (it == ids_.end()) throw ArgumentError("unknown node label '" + label + "'");
    return it->second;
  }

  bool contains(const std::string& label) const { return ids_.contains(label); }
  const std::string& label(NodeId id) const { return labels_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  static LabelTable identity(std::size_t n) {
    LabelTable t;
    for (std::size_t i = 0; i < n; ++i) t.intern(std::to_string(i));
    return t;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> ids_;
};

struct EdgeListResult {
  Graph graph;
  LabelTable labels;
  std::size_t self_loops = 0;       // dropped
  std::size_t duplicate_edges = 0;  // merged
};

// Reads "a b" per line; '#' lines and blank lines are skipped. Extra tokens
// after the first two are ignored.
inline EdgeListResult read_edge_list(std::istream& in) {
  EdgeListResult result;
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream tokens(line);
    std::string a, b;
    if (!(tokens >> a >> b)) {
      throw ConfigError("edge list line " + std::to_string(line_no) +
                        ": expected two node labels");
    }
    const NodeId ia = result.labels.intern(a);
    const NodeId ib = result.labels.intern(b);
    if (ia == ib) {
      ++result.self_loops;
      continue;
    }
    edges.emplace_back(std::min(ia, ib), std::max(ia, ib));
  }
  const std::size_t raw = edges.size();
  result.graph = Graph::from_edges(result.labels.size(), edges);
  result.duplicate_edges = raw - result.graph.edge_count();
  return result;
}

}  // namespace srcest
