#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "srcest/errors.hpp"
#include "srcest/graph.hpp"
#include "srcest/path_oracle.hpp"
#include "srcest/si_model.hpp"
#include "srcest/trees.hpp"

namespace srcest {

// Result of any estimator: the full set of optimal nodes (ascending) and the
// optimal score. What the score means depends on the method.
struct SourceEstimate {
  std::string method;
  std::vector<NodeId> estimators;
  double score = 0.0;

  // Scalar pick used for error distances: the lowest id among the optima.
  NodeId pick() const { return estimators.empty() ? kNoNode : estimators.front(); }
  bool contains(NodeId u) const { return std::binary_search(estimators.begin(), estimators.end(), u); }
};

inline void to_json(nlohmann::json& j, const SourceEstimate& e) {
  j = {{"method", e.method}, {"estimators", e.estimators}, {"score", e.score}};
}

inline void from_json(const nlohmann::json& j, SourceEstimate& e) {
  j.at("method").get_to(e.method);
  j.at("estimators").get_to(e.estimators);
  e.score = j.at("score").is_null() ? -std::numeric_limits<double>::infinity() : j.at("score").get<double>();
}

// Per-node message state of the JCE run, in local ids of H.
struct JceMessages {
  std::vector<int> up;          // f_v(pa(v)), sent to the parent
  std::vector<int> longest;     // l1(v)
  std::vector<int> second;      // l2(v), after any downward update
  std::vector<NodeId> best_child;  // v(1); kNoNode for leaves
  std::vector<int> down;        // g_pa(v)(v) when received, else 0
};

struct JceOutcome {
  SourceEstimate estimate;
  NodeId root = kNoNode;  // global id of the chosen root
  JceMessages messages;
  std::size_t upward_messages = 0;
  std::size_t downward_messages = 0;
};

namespace detail {

// Cheap preconditions; connectivity is confirmed by the BFS in jce.
inline void check_spans(const Subgraph& h, const ObservationSet& ve) {
  if (ve.empty()) throw ArgumentError("observation set is empty");
  for (NodeId u : ve) {
    if (!h.contains(u)) throw ArgumentError("H does not contain explicit node " + std::to_string(u));
  }
  if (h.graph.edge_count() + 1 != h.size()) throw ArgumentError("H is not a tree");
  if (h.size() > 1) {
    for (NodeId l = 0; static_cast<std::size_t>(l) < h.size(); ++l) {
      if (h.graph.degree(l) == 0) throw ArgumentError("H is not a tree");
      if (h.graph.degree(l) == 1 && !ve.contains(h.global(l))) {
        throw ArgumentError("H has leaf " + std::to_string(h.global(l)) + " outside V_e; it is not minimal");
      }
    }
  }
}

}  // namespace detail

// Jordan Center Estimation by message passing on H, the minimal subtree
// spanning V_e. An upward pass collects longest-path lengths towards the
// root; a downward pass walks the best-child chain until the longest and
// second-longest branches differ by at most one. Every leaf of H is
// explicit, so the larger of the two branch lengths at the stopping node is
// its infection range.
inline JceOutcome jce(const Subgraph& h, const ObservationSet& ve) {
  detail::check_spans(h, ve);
  JceOutcome out;
  out.estimate.method = "jce";
  const std::size_t n = h.size();
  if (n <= 2) {
    out.estimate.estimators = h.to_global;
    out.estimate.score = static_cast<double>(n - 1);
    out.root = h.global(0);
    return out;
  }

  NodeId root = 0;
  while (h.graph.degree(root) < 2) ++root;
  out.root = h.global(root);
  const BfsTree bfs = bfs_tree(h.graph, root);
  if (bfs.order.size() != n) throw ArgumentError("H is not a tree");

  JceMessages& m = out.messages;
  m.up.assign(n, 0);
  m.longest.assign(n, 0);
  m.second.assign(n, 0);
  m.best_child.assign(n, kNoNode);
  m.down.assign(n, 0);

  // Children finish before their parent in reverse BFS order; each pushes
  // its message up. Ties keep the lowest child id.
  for (auto it = bfs.order.rbegin(); it != bfs.order.rend(); ++it) {
    const NodeId c = *it;
    const auto ci = static_cast<std::size_t>(c);
    m.up[ci] = m.best_child[ci] == kNoNode ? 1 : m.longest[ci] + 1;
    if (c == root) continue;
    const auto pi = static_cast<std::size_t>(bfs.parent[ci]);
    const int f = m.up[ci];
    const NodeId best = m.best_child[pi];
    if (best == kNoNode || f > m.longest[pi] || (f == m.longest[pi] && c < best)) {
      if (best != kNoNode) m.second[pi] = std::max(m.second[pi], m.longest[pi]);
      m.longest[pi] = f;
      m.best_child[pi] = c;
    } else {
      m.second[pi] = std::max(m.second[pi], f);
    }
    ++out.upward_messages;
  }

  NodeId v = root;
  while (true) {
    const auto vi = static_cast<std::size_t>(v);
    if (v != root) m.second[vi] = std::max(m.second[vi], m.down[vi]);
    if (m.longest[vi] - m.second[vi] <= 1) break;
    const NodeId next = m.best_child[vi];
    if (next == kNoNode) throw InternalError("JCE walked past a leaf");
    m.down[static_cast<std::size_t>(next)] = m.second[vi] + 1;
    ++out.downward_messages;
    v = next;
  }

  const auto vi = static_cast<std::size_t>(v);
  out.estimate.estimators = {h.global(v)};
  out.estimate.score = std::max(m.longest[vi], m.second[vi]);
  return out;
}

// JCE on a tree graph: builds H from V_e, then runs the message passing.
inline JceOutcome jce_on_tree(const Graph& g, const ObservationSet& ve) {
  ve.check_against(g);
  if (!component_is_tree(g, ve.nodes().front())) throw StructureError("tree method on general graph");
  return jce(minimal_spanning_subtree(g, ve), ve);
}

// The full argmin of the infection range over the component holding V_e.
inline SourceEstimate jordan_centers_exhaustive(const Graph& g, const ObservationSet& ve) {
  ve.check_against(g);
  const std::vector<int> range = infection_ranges(g, ve);
  SourceEstimate est;
  est.method = "jordan";
  int best = kInfiniteDistance;
  for (NodeId u = 0; static_cast<std::size_t>(u) < g.node_count(); ++u) {
    const int r = range[static_cast<std::size_t>(u)];
    if (r < best) {
      best = r;
      est.estimators.assign(1, u);
    } else if (r == best && r != kInfiniteDistance) {
      est.estimators.push_back(u);
    }
  }
  if (best == kInfiniteDistance) throw UnreachableError("explicit nodes lie in different components");
  est.score = best;
  return est;
}

struct MlPathSearch {
  SourceEstimate estimate;
  std::vector<double> best_log_probability;  // per node; -inf when infeasible
  std::vector<int> best_horizon;             // per node; -1 when infeasible
  std::size_t paths_seen = 0;
};

// Probabilities within this relative distance of the maximum count as ties.
inline constexpr double kOracleTieTolerance = 1e-9;

// Brute-force source of a most likely consistent infection path over all
// sources and all horizons 0..t_max.
inline MlPathSearch brute_force_ml_path_source(const Graph& g, const ObservationSet& ve,
                                               const SIParams<double>& params, int t_max,
                                               const OracleLimits& limits = {},
                                               BoundaryStubs stubs = {}) {
  limits.check(g, t_max);
  ve.check_against(g);
  params.check(g.node_count(), /*require_band=*/false);
  const std::size_t n = g.node_count();
  MlPathSearch out;
  out.estimate.method = "ml-path-oracle";
  out.best_log_probability.assign(n, -std::numeric_limits<double>::infinity());
  out.best_horizon.assign(n, -1);
  std::vector<double> best_prob(n, -1.0);

  PathEnumerationOptions options;
  options.stubs = stubs;
  for (NodeId v = 0; static_cast<std::size_t>(v) < n; ++v) {
    for (int t = 0; t <= t_max; ++t) {
      const auto m = most_likely_path(g, v, t, ve, params, options);
      out.paths_seen += m.paths_seen;
      if (m.feasible && m.probability > best_prob[static_cast<std::size_t>(v)]) {
        best_prob[static_cast<std::size_t>(v)] = m.probability;
        out.best_horizon[static_cast<std::size_t>(v)] = t;
      }
    }
  }
  const double top = *std::max_element(best_prob.begin(), best_prob.end());
  if (top < 0.0) throw ArgumentError("no consistent path within horizon " + std::to_string(t_max));
  for (NodeId v = 0; static_cast<std::size_t>(v) < n; ++v) {
    const double pv = best_prob[static_cast<std::size_t>(v)];
    if (pv >= 0.0) out.best_log_probability[static_cast<std::size_t>(v)] = std::log(pv);
    if (pv >= top * (1.0 - kOracleTieTolerance) && pv > 0.0) out.estimate.estimators.push_back(v);
  }
  out.estimate.score = std::log(top);
  return out;
}

}  // namespace srcest
