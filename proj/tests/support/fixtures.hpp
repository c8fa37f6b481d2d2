#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "srcest/srcest.hpp"

namespace fixtures {

using srcest::Edge;
using srcest::Graph;
using srcest::NodeId;
// Arbitrary precision, so long products of small fractions stay exact.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

// Ten-node tree: v1 joined to v2, v3, v4; v2 has leaves v5, v6; v3 has v7,
// v8; v4 has v9, v10. Node vk has id k-1.
inline Graph example_tree() {
  const std::vector<Edge> edges{{0, 1}, {0, 2}, {0, 3}, {1, 4}, {1, 5}, {2, 6}, {2, 7}, {3, 8}, {3, 9}};
  return Graph::from_edges(10, edges);
}

constexpr NodeId v(int k) { return k - 1; }

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.emplace_back(static_cast<NodeId>(i - 1), static_cast<NodeId>(i));
  return Graph::from_edges(n, edges);
}

inline Graph star_graph(std::size_t leaves) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i <= leaves; ++i) edges.emplace_back(0, static_cast<NodeId>(i));
  return Graph::from_edges(leaves + 1, edges);
}

inline Graph cycle_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
  return Graph::from_edges(n, edges);
}

inline Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
  }
  return Graph::from_edges(n, edges);
}

// A random tree plus `extra` random non-tree edges (fewer if the graph fills up).
inline Graph random_connected(srcest::Rng& rng, std::size_t n, std::size_t extra) {
  std::vector<Edge> edges = srcest::random_labelled_tree(rng, n).edges();
  const std::size_t max_edges = n * (n - 1) / 2;
  std::size_t tries = 0;
  while (extra > 0 && edges.size() < max_edges && tries++ < 1000) {
    const auto a = static_cast<NodeId>(srcest::uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
    const auto b = static_cast<NodeId>(srcest::uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
    if (a == b) continue;
    const Edge e{std::min(a, b), std::max(a, b)};
    if (std::find(edges.begin(), edges.end(), e) != edges.end()) continue;
    edges.push_back(e);
    --extra;
  }
  return Graph::from_edges(n, edges);
}

inline srcest::ObservationSet random_subset(srcest::Rng& rng, std::size_t n, double keep = 0.5) {
  std::vector<NodeId> out;
  while (out.empty()) {
    for (NodeId u = 0; static_cast<std::size_t>(u) < n; ++u) {
      if (srcest::bernoulli(rng, keep)) out.push_back(u);
    }
  }
  return srcest::ObservationSet(std::move(out));
}

constexpr int kInf = 1 << 29;

// All-pairs hop distances by Floyd-Warshall.
inline std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (auto [a, b] : g.edges()) {
    d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
    d[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  return d;
}

inline srcest::SIParams<Rational> rational_params(Rational p, Rational q, std::size_t n) {
  return srcest::SIParams<Rational>::uniform(p, q, n);
}

inline Rational power(Rational x, int k) {
  Rational r(1);
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace fixtures
