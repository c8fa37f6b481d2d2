#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "srcest/errors.hpp"
#include "srcest/graph.hpp"
#include "srcest/random.hpp"

namespace srcest {

namespace detail {

// Grows a tree breadth-first: each expanded node receives all of its
// children at once (degree(u) for the root, degree(u) - 1 otherwise), until
// the node count reaches the budget.
inline Graph grow_tree(std::size_t budget, const std::function<int()>& next_degree) {
  if (budget < 2) throw ArgumentError("tree budget must be at least 2");
  std::vector<Edge> edges;
  std::size_t count = 1;
  std::vector<NodeId> queue{0};
  for (std::size_t head = 0; head < queue.size() && count < budget; ++head) {
    const NodeId u = queue[head];
    const int degree = next_degree();
    const int kids = u == 0 ? degree : degree - 1;
    for (int k = 0; k < kids; ++k) {
      const auto c = static_cast<NodeId>(count++);
      edges.emplace_back(u, c);
      queue.push_back(c);
    }
  }
  return Graph::from_edges(count, edges);
}

}  // namespace detail

// Every interior node has the same degree.
inline Graph regular_tree(int degree, std::size_t budget) {
  if (degree < 2) throw ArgumentError("regular tree degree must be at least 2");
  if (budget < static_cast<std::size_t>(degree) + 1) throw ArgumentError("budget below degree + 1");
  return detail::grow_tree(budget, [degree] { return degree; });
}

struct RegularTree {
  Graph graph;
  int degree = 0;
};

// One degree drawn uniformly from [min_degree, max_degree] for the whole tree.
inline RegularTree gen_regular_tree(Rng& rng, std::size_t budget, int min_degree = 3, int max_degree = 6) {
  if (min_degree < 2 || max_degree < min_degree) throw ArgumentError("invalid degree range");
  const auto degree = static_cast<int>(uniform_int(rng, min_degree, max_degree));
  return {regular_tree(degree, budget), degree};
}

enum class RandomTreeMode { random1, random2 };

// random1: each node's degree uniform over {3,4,5,6}; random2: over {3,6}.
inline Graph gen_random_tree(Rng& rng, RandomTreeMode mode, std::size_t budget) {
  if (budget < 4) throw ArgumentError("random tree budget must be at least 4");
  return detail::grow_tree(budget, [&]() -> int {
    if (mode == RandomTreeMode::random1) return static_cast<int>(uniform_int(rng, 3, 6));
    return uniform_int(rng, 0, 1) == 0 ? 3 : 6;
  });
}

// The graph with node u renamed to perm[u]; perm must be a permutation.
inline Graph permute_nodes(const Graph& g, std::span<const NodeId> perm) {
  if (perm.size() != g.node_count()) throw ArgumentError("permutation size does not match the graph");
  std::vector<Edge> edges;
  edges.reserve(g.edge_count());
  for (auto [a, b] : g.edges()) edges.emplace_back(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
  return Graph::from_edges(g.node_count(), edges);
}

// Uniform random permutation of 0..n-1 (Fisher-Yates).
inline std::vector<NodeId> random_permutation(Rng& rng, std::size_t n) {
  std::vector<NodeId> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<NodeId>(i);
  for (std::size_t i = n; i-- > 1;) {
    std::swap(perm[i], perm[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i)))]);
  }
  return perm;
}

// Uniform labelled tree on n nodes, decoded from a random Pruefer sequence.
inline Graph random_labelled_tree(Rng& rng, std::size_t n) {
  if (n == 0) throw ArgumentError("tree needs at least one node");
  if (n == 1) return Graph::from_edges(1, {});
  std::vector<NodeId> code(n - 2);
  for (auto& c : code) c = static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
  std::vector<int> degree(n, 1);
  for (NodeId c : code) ++degree[static_cast<std::size_t>(c)];
  std::vector<Edge> edges;
  for (NodeId c : code) {
    NodeId leaf = 0;
    while (degree[static_cast<std::size_t>(leaf)] != 1) ++leaf;
    edges.emplace_back(leaf, c);
    --degree[static_cast<std::size_t>(leaf)];
    --degree[static_cast<std::size_t>(c)];
  }
  NodeId a = kNoNode;
  for (NodeId u = 0; static_cast<std::size_t>(u) < n; ++u) {
    if (degree[static_cast<std::size_t>(u)] != 1) continue;
    if (a == kNoNode) {
      a = u;
    } else {
      edges.emplace_back(a, u);
      break;
    }
  }
  return Graph::from_edges(n, edges);
}

struct SmallWorld {
  Graph graph;
  std::size_t attempts = 0;  // generations until a connected graph came out
};

inline Graph watts_strogatz_once(Rng& rng, std::size_t n, int k, double beta) {
  std::vector<std::vector<NodeId>> adj(n);
  auto linked = [&](NodeId a, NodeId b) {
    const auto& l = adj[static_cast<std::size_t>(a)];
    return std::find(l.begin(), l.end(), b) != l.end();
  };
  auto unlink = [&](NodeId a, NodeId b) {
    auto& la = adj[static_cast<std::size_t>(a)];
    la.erase(std::find(la.begin(), la.end(), b));
    auto& lb = adj[static_cast<std::size_t>(b)];
    lb.erase(std::find(lb.begin(), lb.end(), a));
  };
  auto link = [&](NodeId a, NodeId b) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  };
  const auto nn = static_cast<NodeId>(n);
  for (NodeId i = 0; i < nn; ++i) {
    for (int j = 1; j <= k / 2; ++j) link(i, (i + j) % nn);
  }
  for (int j = 1; j <= k / 2; ++j) {
    for (NodeId i = 0; i < nn; ++i) {
      if (!bernoulli(rng, beta)) continue;
      const NodeId old = (i + j) % nn;
      if (adj[static_cast<std::size_t>(i)].size() + 1 >= n) continue;  // nowhere to go
      NodeId w = i;
      while (w == i || linked(i, w)) w = static_cast<NodeId>(uniform_int(rng, 0, nn - 1));
      unlink(i, old);
      link(i, w);
    }
  }
  std::vector<Edge> edges;
  for (NodeId i = 0; i < nn; ++i) {
    for (NodeId w : adj[static_cast<std::size_t>(i)]) {
      if (i < w) edges.emplace_back(i, w);
    }
  }
  return Graph::from_edges(n, edges);
}

// Watts-Strogatz: ring lattice with k neighbors per node, each lattice edge
// rewired with probability beta. Regenerates until connected.
inline SmallWorld gen_small_world(Rng& rng, std::size_t n, int k, double beta, std::size_t max_attempts = 1000) {
  if (k <= 0 || k % 2 != 0) throw ArgumentError("small-world k must be positive and even");
  if (static_cast<std::size_t>(k) >= n) throw ArgumentError("small-world k must be below n");
  if (beta < 0.0 || beta > 1.0) throw ArgumentError("rewiring probability must lie in [0,1]");
  SmallWorld out;
  while (out.attempts < max_attempts) {
    ++out.attempts;
    out.graph = watts_strogatz_once(rng, n, k, beta);
    if (is_connected(out.graph)) return out;
  }
  throw ConfigError("no connected small-world graph after " + std::to_string(max_attempts) + " attempts");
}

}  // namespace srcest
