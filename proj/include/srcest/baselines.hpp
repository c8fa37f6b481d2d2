#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include "srcest/errors.hpp"
#include "srcest/graph.hpp"
#include "srcest/tree_estimator.hpp"
#include "srcest/trees.hpp"

// Centrality-based source estimators. Candidates are all nodes of the
// component holding V_e; ties keep every optimal node.

namespace srcest {

enum class Direction { minimize, maximize };

template <typename Real = double>
struct CentralityScores {
  std::vector<Real> score;   // per node; only meaningful for candidates
  std::vector<char> candidate;
  Direction direction = Direction::minimize;
};

namespace detail {

inline std::vector<DistanceMap> explicit_distances(const Graph& g, const ObservationSet& ve) {
  ve.check_against(g);
  std::vector<DistanceMap> out;
  out.reserve(ve.size());
  for (NodeId e : ve) out.push_back(bfs_distances(g, e));
  for (const auto& d : out) {
    if (d[ve.nodes().front()] == kInfiniteDistance) {
      throw UnreachableError("explicit nodes lie in different components");
    }
  }
  return out;
}

inline std::vector<char> component_mask(const DistanceMap& d) {
  std::vector<char> m(d.dist.size(), 0);
  for (std::size_t u = 0; u < m.size(); ++u) m[u] = d.dist[u] != kInfiniteDistance;
  return m;
}

// Full optimal set under the scores' direction. Floating scores within a
// relative 1e-12 of the best tie, since summation order differs per node.
template <typename Real>
SourceEstimate select(const CentralityScores<Real>& s, std::string method) {
  auto exceeds = [&](const Real& a, const Real& b) {  // a strictly better than b
    const bool raw = s.direction == Direction::minimize ? a < b : b < a;
    if constexpr (std::is_floating_point_v<Real>) {
      return raw && std::abs(a - b) > 1e-12 * std::max(Real(1), std::abs(b));
    } else {
      return raw;
    }
  };
  bool have = false;
  Real best{};
  for (std::size_t u = 0; u < s.score.size(); ++u) {
    if (s.candidate[u] && (!have || exceeds(s.score[u], best))) {
      have = true;
      best = s.score[u];
    }
  }
  if (!have) throw ArgumentError("no candidate nodes");
  SourceEstimate est;
  est.method = std::move(method);
  for (std::size_t u = 0; u < s.score.size(); ++u) {
    if (s.candidate[u] && !exceeds(best, s.score[u])) est.estimators.push_back(static_cast<NodeId>(u));
  }
  est.score = static_cast<double>(best);
  return est;
}

}  // namespace detail

// C_D(v) = sum over V_e of d(v, i).
inline CentralityScores<double> distance_centrality(const Graph& g, const ObservationSet& ve) {
  const auto dists = detail::explicit_distances(g, ve);
  CentralityScores<double> s;
  s.direction = Direction::minimize;
  s.candidate = detail::component_mask(dists.front());
  s.score.assign(g.node_count(), 0.0);
  for (const auto& d : dists) {
    for (std::size_t u = 0; u < s.score.size(); ++u) {
      if (s.candidate[u]) s.score[u] += d.dist[u];
    }
  }
  return s;
}

// C_C(v) = sum over i in V_e, i != v, of 1 / d(v, i).
template <typename Real = double>
CentralityScores<Real> closeness_centrality(const Graph& g, const ObservationSet& ve) {
  const auto dists = detail::explicit_distances(g, ve);
  CentralityScores<Real> s;
  s.direction = Direction::maximize;
  s.candidate = detail::component_mask(dists.front());
  s.score.assign(g.node_count(), Real(0));
  for (const auto& d : dists) {
    for (std::size_t u = 0; u < s.score.size(); ++u) {
      if (s.candidate[u] && d.dist[u] > 0) s.score[u] += Real(1) / Real(d.dist[u]);
    }
  }
  return s;
}

// C_B(v) = sum over unordered pairs {i, j} of V_e with v not an endpoint of
// sigma_ij(v) / sigma_ij. Dependencies are accumulated per explicit source
// with targets restricted to V_e (Brandes), then halved.
template <typename Real = double>
CentralityScores<Real> betweenness_centrality(const Graph& g, const ObservationSet& ve) {
  ve.check_against(g);
  if (ve.size() < 2) throw ArgumentError("betweenness needs at least two explicit nodes");
  const std::size_t n = g.node_count();
  const std::vector<char> is_target = ve.mask(n);
  CentralityScores<Real> s;
  s.direction = Direction::maximize;
  s.score.assign(n, Real(0));

  std::vector<int> dist(n);
  std::vector<Real> sigma(n);
  std::vector<Real> delta(n);
  std::vector<NodeId> order;
  for (NodeId src : ve) {
    std::fill(dist.begin(), dist.end(), kInfiniteDistance);
    std::fill(sigma.begin(), sigma.end(), Real(0));
    std::fill(delta.begin(), delta.end(), Real(0));
    order.clear();
    dist[static_cast<std::size_t>(src)] = 0;
    sigma[static_cast<std::size_t>(src)] = Real(1);
    order.push_back(src);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const NodeId u = order[head];
      const auto ui = static_cast<std::size_t>(u);
      for (NodeId w : g.neighbors(u)) {
        const auto wi = static_cast<std::size_t>(w);
        if (dist[wi] == kInfiniteDistance) {
          dist[wi] = dist[ui] + 1;
          order.push_back(w);
        }
        if (dist[wi] == dist[ui] + 1) sigma[wi] += sigma[ui];
      }
    }
    for (NodeId e : ve) {
      if (dist[static_cast<std::size_t>(e)] == kInfiniteDistance) {
        throw UnreachableError("explicit nodes lie in different components");
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId w = *it;
      const auto wi = static_cast<std::size_t>(w);
      const Real through = (is_target[wi] ? Real(1) : Real(0)) + delta[wi];
      for (NodeId u : g.neighbors(w)) {
        const auto ui = static_cast<std::size_t>(u);
        if (dist[ui] + 1 == dist[wi]) delta[ui] += sigma[ui] / sigma[wi] * through;
      }
      if (w != src) s.score[wi] += delta[wi];
    }
  }
  for (auto& x : s.score) x /= Real(2);
  s.candidate.assign(n, 0);
  for (std::size_t u = 0; u < n; ++u) s.candidate[u] = dist[u] != kInfiniteDistance;
  return s;
}

inline SourceEstimate distance_center(const Graph& g, const ObservationSet& ve) {
  return detail::select(distance_centrality(g, ve), "dc");
}

inline SourceEstimate closeness_center(const Graph& g, const ObservationSet& ve) {
  return detail::select(closeness_centrality(g, ve), "cc");
}

inline SourceEstimate betweenness_center(const Graph& g, const ObservationSet& ve) {
  return detail::select(betweenness_centrality(g, ve), "bc");
}

}  // namespace srcest
