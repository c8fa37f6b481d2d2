#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "srcest/errors.hpp"
#include "srcest/graph.hpp"
#include "srcest/si_model.hpp"
#include "srcest/tree_estimator.hpp"
#include "srcest/trees.hpp"

namespace srcest {

// H_v: the shortest-path tree from v to every explicit node, widened by every
// edge of G incident to a node of that tree.
struct CandidateSubgraph {
  NodeId center = kNoNode;  // global id
  Subgraph h;
  std::vector<int> tier;    // BFS distance from the center within H_v, per local id

  NodeId local_center() const { return h.local(center); }
  std::size_t size() const { return h.size(); }
};

inline CandidateSubgraph build_candidate_subgraph(const Graph& g, NodeId v, const ObservationSet& ve) {
  g.check_node(v);
  ve.check_against(g);
  const BfsTree bfs = bfs_tree(g, v);
  std::vector<char> on_tree(g.node_count(), 0);
  on_tree[static_cast<std::size_t>(v)] = 1;
  for (NodeId u : ve) {
    if (bfs.dist[static_cast<std::size_t>(u)] == kInfiniteDistance) {
      throw UnreachableError("explicit node " + std::to_string(u) + " unreachable from " + std::to_string(v));
    }
    for (NodeId x = u; !on_tree[static_cast<std::size_t>(x)]; x = bfs.parent[static_cast<std::size_t>(x)]) {
      on_tree[static_cast<std::size_t>(x)] = 1;
    }
  }
  std::vector<NodeId> nodes;
  std::vector<char> in_h(g.node_count(), 0);
  std::vector<Edge> edges;
  for (NodeId u = 0; static_cast<std::size_t>(u) < g.node_count(); ++u) {
    if (!on_tree[static_cast<std::size_t>(u)]) continue;
    for (NodeId w : g.neighbors(u)) {
      if (!on_tree[static_cast<std::size_t>(w)] || u < w) edges.emplace_back(u, w);
      if (!in_h[static_cast<std::size_t>(w)]) {
        in_h[static_cast<std::size_t>(w)] = 1;
        nodes.push_back(w);
      }
    }
    if (!in_h[static_cast<std::size_t>(u)]) {
      in_h[static_cast<std::size_t>(u)] = 1;
      nodes.push_back(u);
    }
  }
  CandidateSubgraph c;
  c.center = v;
  c.h = Subgraph::build(g.node_count(), std::move(nodes), edges);
  c.tier = bfs_distances(c.h.graph, c.local_center()).dist;
  return c;
}

// A rooted tree over local ids of some Subgraph, with heights D and depths U.
struct InfectionTree {
  RootedTree tree;
  std::vector<int> height;        // D_T(u); 0 for non-members
  std::vector<int> depth;         // U_T(u); 0 for non-members
  std::vector<NodeId> to_global;  // local -> global

  static InfectionTree make(RootedTree t, std::vector<NodeId> to_global) {
    if (to_global.size() != t.universe_size()) throw ArgumentError("id map does not match the tree universe");
    InfectionTree it;
    it.height = subtree_heights(t);
    it.depth = tree_depths(t);
    it.tree = std::move(t);
    it.to_global = std::move(to_global);
    return it;
  }

  std::size_t size() const { return tree.size(); }
  NodeId root() const { return tree.root(); }
  NodeId global_root() const { return to_global[static_cast<std::size_t>(tree.root())]; }

  // Member nodes in global ids, ascending.
  std::vector<NodeId> global_nodes() const {
    std::vector<NodeId> out;
    for (NodeId u : tree.preorder()) out.push_back(to_global[static_cast<std::size_t>(u)]);
    std::sort(out.begin(), out.end());
    return out;
  }
};

// F = sum over non-root u of D(pa(u)) - D(u).
inline long long objective_f(const InfectionTree& t) {
  long long f = 0;
  for (NodeId u : t.tree.preorder()) {
    if (u == t.root()) continue;
    f += t.height[static_cast<std::size_t>(t.tree.parent(u))] - t.height[static_cast<std::size_t>(u)];
  }
  return f;
}

// The same objective in degree form: sum of (Deg(u) - 2) D(u), plus 2 D(root).
inline long long objective_f_degree_form(const InfectionTree& t) {
  long long f = 2LL * t.height[static_cast<std::size_t>(t.root())];
  for (NodeId u : t.tree.preorder()) {
    f += (static_cast<long long>(t.tree.degree(u)) - 2) * t.height[static_cast<std::size_t>(u)];
  }
  return f;
}

namespace detail {

inline void check_tree_covers(const InfectionTree& t, const ObservationSet& ve) {
  std::vector<char> in_tree;
  for (NodeId u : t.tree.preorder()) {
    const auto gu = static_cast<std::size_t>(t.to_global[static_cast<std::size_t>(u)]);
    if (in_tree.size() <= gu) in_tree.resize(gu + 1, 0);
    in_tree[gu] = 1;
  }
  for (NodeId e : ve) {
    if (static_cast<std::size_t>(e) >= in_tree.size() || !in_tree[static_cast<std::size_t>(e)]) {
      throw ArgumentError("explicit node " + std::to_string(e) + " is not in the infection tree");
    }
  }
}

}  // namespace detail

// Likelihood of an infection tree T rooted at v:
//   p^(|T|-1) (1-p)^(F - |T| + 1) prod_{V_e} q_u prod_{T \ V_e} (1 - q_u).
// Exact in any field-like Real.
template <typename Real>
Real tree_likelihood(const InfectionTree& t, const ObservationSet& ve, const SIParams<Real>& params) {
  detail::check_tree_covers(t, ve);
  const Real one(1);
  Real prob(1);
  const long long stays = objective_f(t) - static_cast<long long>(t.size()) + 1;
  for (std::size_t k = 1; k < t.size(); ++k) prob *= params.p;
  for (long long k = 0; k < stays; ++k) prob *= one - params.p;
  for (NodeId u : t.tree.preorder()) {
    const auto gu = t.to_global[static_cast<std::size_t>(u)];
    const Real& qu = params.q[static_cast<std::size_t>(gu)];
    prob *= ve.contains(gu) ? qu : one - qu;
  }
  return prob;
}

inline double tree_log_likelihood(const InfectionTree& t, const ObservationSet& ve, const SIParams<double>& params) {
  detail::check_tree_covers(t, ve);
  const auto n = static_cast<double>(t.size());
  const auto stays = static_cast<double>(objective_f(t)) - n + 1.0;
  double total = (n - 1.0) * std::log(params.p) + stays * std::log1p(-params.p);
  for (NodeId u : t.tree.preorder()) {
    const auto gu = t.to_global[static_cast<std::size_t>(u)];
    const double qu = params.q[static_cast<std::size_t>(gu)];
    total += ve.contains(gu) ? std::log(qu) : std::log1p(-qu);
  }
  return total;
}

// The latest infection path tracing T on g: horizon D(root), each member u
// infected at D(root) - D(u), explicit iff in V_e, nothing else infected.
inline InfectionPath latest_path_for_tree(const Graph& g, const InfectionTree& t, const ObservationSet& ve) {
  const int horizon = t.height[static_cast<std::size_t>(t.root())];
  InfectionPath x = InfectionPath::empty(g.node_count(), t.global_root(), horizon);
  for (NodeId u : t.tree.preorder()) {
    const auto gu = static_cast<std::size_t>(t.to_global[static_cast<std::size_t>(u)]);
    x.infection_time[gu] = horizon - t.height[static_cast<std::size_t>(u)];
    x.explicit_flag[gu] = ve.contains(static_cast<NodeId>(gu)) ? 1 : 0;
  }
  return x;
}

// Repeatedly drops non-root leaves outside V_e.
inline InfectionTree prune_leaves(const InfectionTree& t, const ObservationSet& ve) {
  const std::size_t n = t.tree.universe_size();
  std::vector<char> member = t.tree.members();
  std::vector<int> child_count(n, 0);
  for (NodeId u : t.tree.preorder()) {
    if (u != t.root()) ++child_count[static_cast<std::size_t>(t.tree.parent(u))];
  }
  std::vector<NodeId> stack;
  auto removable = [&](NodeId u) {
    return u != t.root() && child_count[static_cast<std::size_t>(u)] == 0 &&
           !ve.contains(t.to_global[static_cast<std::size_t>(u)]);
  };
  for (NodeId u : t.tree.preorder()) {
    if (removable(u)) stack.push_back(u);
  }
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    member[static_cast<std::size_t>(u)] = 0;
    const NodeId p = t.tree.parent(u);
    if (--child_count[static_cast<std::size_t>(p)] == 0 && removable(p)) stack.push_back(p);
  }
  std::vector<NodeId> parent = t.tree.parents();
  for (std::size_t u = 0; u < n; ++u) {
    if (!member[u]) parent[u] = kNoNode;
  }
  return InfectionTree::make(RootedTree::from_parents(t.root(), std::move(parent), std::move(member)),
                             t.to_global);
}

struct ReverseGreedyOptions {
  // Recompute D and U from scratch after every reattachment and compare with
  // the incrementally maintained values; throws InternalError on mismatch.
  bool verify_incremental = false;
};

struct ReverseGreedyResult {
  InfectionTree tree;  // spanning tree of H_v
  std::size_t reattachments = 0;  // moves to a node other than the current parent
};

namespace detail {

// Mutable rooted tree used by the greedy; ids are local to H_v.
class MutableTree {
 public:
  MutableTree(const BfsTree& bfs, std::size_t n) : root_(bfs.root), parent_(bfs.parent), children_(n) {
    for (NodeId u : bfs.order) {
      if (u != root_) children_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(u)])].push_back(u);
    }
    height_.assign(n, 0);
    depth_.assign(n, 0);
    for (NodeId u : bfs.order) {
      if (u != root_) depth_[static_cast<std::size_t>(u)] = depth_[static_cast<std::size_t>(parent(u))] + 1;
    }
    for (auto it = bfs.order.rbegin(); it != bfs.order.rend(); ++it) {
      if (*it != root_) {
        auto& hp = height_[static_cast<std::size_t>(parent(*it))];
        hp = std::max(hp, height(*it) + 1);
      }
    }
  }

  NodeId root() const { return root_; }
  NodeId parent(NodeId u) const { return parent_[static_cast<std::size_t>(u)]; }
  int height(NodeId u) const { return height_[static_cast<std::size_t>(u)]; }
  int depth(NodeId u) const { return depth_[static_cast<std::size_t>(u)]; }
  const std::vector<NodeId>& parents() const { return parent_; }
  const std::vector<int>& heights() const { return height_; }
  const std::vector<int>& depths() const { return depth_; }

  bool in_subtree(NodeId y, NodeId x) const {
    for (NodeId z = y; z != kNoNode; z = parent(z)) {
      if (z == x) return true;
    }
    return false;
  }

  // Height of u ignoring the branch through child `skip`.
  int height_without(NodeId u, NodeId skip) const {
    int h = 0;
    for (NodeId c : children_[static_cast<std::size_t>(u)]) {
      if (c != skip) h = std::max(h, height(c) + 1);
    }
    return h;
  }

  void move(NodeId x, NodeId y) {
    const NodeId old = parent(x);
    auto& siblings = children_[static_cast<std::size_t>(old)];
    siblings.erase(std::find(siblings.begin(), siblings.end(), x));
    children_[static_cast<std::size_t>(y)].push_back(x);
    parent_[static_cast<std::size_t>(x)] = y;

    const int delta = depth(y) + 1 - depth(x);
    if (delta != 0) {
      std::vector<NodeId> stack{x};
      while (!stack.empty()) {
        const NodeId z = stack.back();
        stack.pop_back();
        depth_[static_cast<std::size_t>(z)] += delta;
        for (NodeId c : children_[static_cast<std::size_t>(z)]) stack.push_back(c);
      }
    }
    refresh_heights(old);
    refresh_heights(y);
  }

 private:
  void refresh_heights(NodeId u) {
    for (; u != kNoNode; u = parent(u)) {
      const int h = height_without(u, kNoNode);
      if (h == height(u)) break;
      height_[static_cast<std::size_t>(u)] = h;
    }
  }

  NodeId root_;
  std::vector<NodeId> parent_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<int> height_;
  std::vector<int> depth_;
};

}  // namespace detail

// Greedy re-parenting of the BFS tree of H_v, deepest tier first, so that
// nodes near the root end up with low degree. Each node is visited once, at
// its BFS tier, in order of increasing current height (then id).
inline ReverseGreedyResult reverse_greedy(const CandidateSubgraph& c, const ReverseGreedyOptions& options = {}) {
  const Graph& h = c.h.graph;
  const std::size_t n = h.node_count();
  const NodeId v = c.local_center();
  const BfsTree bfs = bfs_tree(h, v);
  if (bfs.order.size() != n) throw ArgumentError("candidate subgraph is not connected");
  detail::MutableTree t(bfs, n);

  std::vector<std::vector<NodeId>> tiers;
  for (NodeId u : bfs.order) {
    const auto d = static_cast<std::size_t>(bfs.dist[static_cast<std::size_t>(u)]);
    if (tiers.size() <= d) tiers.resize(d + 1);
    tiers[d].push_back(u);
  }

  ReverseGreedyResult result;
  for (std::size_t d = tiers.size(); d-- > 1;) {
    std::vector<NodeId> tier = tiers[d];
    std::stable_sort(tier.begin(), tier.end(), [&](NodeId a, NodeId b) {
      return t.height(a) != t.height(b) ? t.height(a) < t.height(b) : a < b;
    });
    for (NodeId x : tier) {
      const int budget = t.height(v) - t.height(x) - 1;
      NodeId best = kNoNode;
      int best_depth = 0;
      int best_height = 0;
      for (NodeId y : h.neighbors(x)) {
        if (t.depth(y) > budget || t.in_subtree(y, x)) continue;
        const int hy = y == t.parent(x) ? t.height_without(y, x) : t.height(y);
        const int uy = t.depth(y);
        if (best == kNoNode || uy > best_depth || (uy == best_depth && hy > best_height)) {
          best = y;
          best_depth = uy;
          best_height = hy;
        }
      }
      if (best == kNoNode) throw InternalError("no admissible parent for node " + std::to_string(c.h.global(x)));
      if (best != t.parent(x)) {
        t.move(x, best);
        ++result.reattachments;
      }
      if (options.verify_incremental) {
        const auto fresh = RootedTree::from_parents(v, t.parents());
        if (subtree_heights(fresh) != t.heights() || tree_depths(fresh) != t.depths()) {
          throw InternalError("incremental heights or depths diverged after moving node " +
                              std::to_string(c.h.global(x)));
        }
      }
    }
  }
  result.tree = InfectionTree::make(RootedTree::from_parents(v, t.parents()), c.h.to_global);
  return result;
}

// Number of spanning trees of a connected graph (Kirchhoff), rounded.
inline double spanning_tree_count(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n <= 1) return 1.0;
  if (!is_connected(g)) return 0.0;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n - 1));
  for (NodeId u = 1; static_cast<std::size_t>(u) < n; ++u) {
    lap(u - 1, u - 1) = static_cast<double>(g.degree(u));
    for (NodeId w : g.neighbors(u)) {
      if (w > 0) lap(u - 1, w - 1) = -1.0;
    }
  }
  return std::round(lap.partialPivLu().determinant());
}

namespace detail {

// Union-find without path compression, so unions can be rolled back.
class RollbackUnionFind {
 public:
  explicit RollbackUnionFind(std::size_t n) : leader_(n), rank_(n, 0) {
    std::iota(leader_.begin(), leader_.end(), 0);
  }

  NodeId find(NodeId u) const {
    while (leader_[static_cast<std::size_t>(u)] != u) u = leader_[static_cast<std::size_t>(u)];
    return u;
  }

  bool unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[static_cast<std::size_t>(a)] < rank_[static_cast<std::size_t>(b)]) std::swap(a, b);
    history_.push_back({b, rank_[static_cast<std::size_t>(a)]});
    leader_[static_cast<std::size_t>(b)] = a;
    if (rank_[static_cast<std::size_t>(a)] == rank_[static_cast<std::size_t>(b)]) ++rank_[static_cast<std::size_t>(a)];
    return true;
  }

  void undo() {
    const auto [child, old_rank] = history_.back();
    history_.pop_back();
    const NodeId top = leader_[static_cast<std::size_t>(child)];
    rank_[static_cast<std::size_t>(top)] = old_rank;
    leader_[static_cast<std::size_t>(child)] = child;
  }

 private:
  std::vector<NodeId> leader_;
  std::vector<int> rank_;
  std::vector<std::pair<NodeId, int>> history_;
};

}  // namespace detail

// Calls visit(edges) for every spanning tree of a connected graph, where
// `edges` is the chosen subset of g.edges(). Edges are decided in order;
// an edge is skipped only if the remaining ones can still connect g.
template <typename Visitor>
void for_each_spanning_tree(const Graph& g, Visitor&& visit) {
  const std::size_t n = g.node_count();
  if (n == 0 || !is_connected(g)) return;
  const std::vector<Edge> edges = g.edges();
  detail::RollbackUnionFind uf(n);
  std::vector<Edge> chosen;

  auto completable = [&](std::size_t next) {
    detail::RollbackUnionFind probe(n);
    std::size_t joined = 0;
    for (const Edge& e : chosen) joined += probe.unite(e.first, e.second);
    for (std::size_t i = next; i < edges.size() && joined + 1 < n; ++i) joined += probe.unite(edges[i].first, edges[i].second);
    return joined + 1 == n;
  };

  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (chosen.size() + 1 == n) {
      visit(static_cast<const std::vector<Edge>&>(chosen));
      return;
    }
    if (i == edges.size()) return;
    if (uf.unite(edges[i].first, edges[i].second)) {
      chosen.push_back(edges[i]);
      rec(i + 1);
      chosen.pop_back();
      uf.undo();
    }
    if (completable(i + 1)) rec(i + 1);
  };
  rec(0);
}

struct SpanningTreeOracleResult {
  InfectionTree tree;  // an argmin of F among spanning trees of H_v
  long long objective = 0;
  std::size_t trees_seen = 0;
};

inline constexpr double kMaxOracleSpanningTrees = 1e5;

inline SpanningTreeOracleResult spanning_tree_oracle(const CandidateSubgraph& c,
                                                     double max_trees = kMaxOracleSpanningTrees) {
  const Graph& h = c.h.graph;
  const double count = spanning_tree_count(h);
  if (count > max_trees) {
    throw ScaleRefusal("candidate subgraph has " + std::to_string(static_cast<long long>(count)) +
                       " spanning trees, limit " + std::to_string(static_cast<long long>(max_trees)));
  }
  const NodeId v = c.local_center();
  std::optional<SpanningTreeOracleResult> best;
  std::size_t seen = 0;
  for_each_spanning_tree(h, [&](const std::vector<Edge>& edges) {
    ++seen;
    const Graph tg = Graph::from_edges(h.node_count(), edges);
    InfectionTree it = InfectionTree::make(root_tree(tg, v), c.h.to_global);
    const long long f = objective_f(it);
    if (!best || f < best->objective) best = SpanningTreeOracleResult{std::move(it), f, 0};
  });
  if (!best) throw ArgumentError("candidate subgraph is not connected");
  best->trees_seen = seen;
  return *best;
}

enum class GeneralMethod { reverse_greedy, oracle };

// How a candidate's tree is scored. tree_formula is the closed form
// tree_log_likelihood, which charges stays only along tree edges.
// exact_path evaluates the latest path tracing the tree on the whole graph,
// so susceptible neighbors outside the tree pay (1-p) per slot as well.
enum class ScoreMode { tree_formula, exact_path };

inline std::string method_name(GeneralMethod m) { return m == GeneralMethod::oracle ? "oracle" : "rg"; }

struct GeneralEstimatorOptions {
  GeneralMethod method = GeneralMethod::reverse_greedy;
  bool prune = true;
  // Restrict candidate sources to the BFS ball of this radius around the
  // lowest-id Jordan center of V_e. Negative: the whole component.
  int candidate_radius = -1;
  double max_oracle_trees = kMaxOracleSpanningTrees;
  ScoreMode score = ScoreMode::tree_formula;
  std::vector<int> stubs;  // exact_path only; see degree_padding
};

struct CandidateScore {
  NodeId node = kNoNode;
  double log_likelihood = 0.0;
  long long objective = 0;     // F of the minimizing spanning tree, before pruning
  std::size_t tree_size = 0;   // |T| after pruning
};

struct GeneralEstimate {
  SourceEstimate estimate;
  std::vector<CandidateScore> candidates;  // ascending node id
  bool boundary = false;                   // some estimator has degree 1 in G
};

// Candidate sources: the component of V_e, or a ball around its Jordan center.
inline std::vector<NodeId> candidate_sources(const Graph& g, const ObservationSet& ve, int radius) {
  ve.check_against(g);
  const NodeId anchor = ve.nodes().front();
  const DistanceMap from_anchor = bfs_distances(g, anchor);
  for (NodeId e : ve) {
    if (from_anchor[e] == kInfiniteDistance) throw UnreachableError("explicit nodes lie in different components");
  }
  if (radius < 0) {
    std::vector<NodeId> comp = component_of(g, anchor);
    std::sort(comp.begin(), comp.end());
    return comp;
  }
  const NodeId center = jordan_centers_exhaustive(g, ve).pick();
  const DistanceMap d = bfs_distances(g, center);
  std::vector<NodeId> out;
  for (NodeId u = 0; static_cast<std::size_t>(u) < g.node_count(); ++u) {
    if (d[u] <= radius) out.push_back(u);
  }
  return out;
}

// Score of one candidate source: minimize F over spanning trees of H_v (RG
// or exhaustive), prune non-explicit leaves, evaluate the tree likelihood.
inline CandidateScore score_candidate(const Graph& g, NodeId v, const ObservationSet& ve,
                                      const SIParams<double>& params, const GeneralEstimatorOptions& options) {
  const CandidateSubgraph c = build_candidate_subgraph(g, v, ve);
  InfectionTree tree = options.method == GeneralMethod::oracle
                           ? spanning_tree_oracle(c, options.max_oracle_trees).tree
                           : reverse_greedy(c).tree;
  CandidateScore s;
  s.node = v;
  s.objective = objective_f(tree);
  if (options.prune) tree = prune_leaves(tree, ve);
  s.tree_size = tree.size();
  s.log_likelihood = options.score == ScoreMode::exact_path
                         ? path_log_probability(g, latest_path_for_tree(g, tree, ve), params, options.stubs)
                         : tree_log_likelihood(tree, ve, params);
  return s;
}

// Scores within this relative distance of the best count as tied.
inline constexpr double kScoreTieTolerance = 1e-12;

inline GeneralEstimate estimate_source_general(const Graph& g, const ObservationSet& ve,
                                               const SIParams<double>& params,
                                               const GeneralEstimatorOptions& options = {}) {
  ve.check_against(g);
  params.check(g.node_count(), /*require_band=*/false);
  GeneralEstimate out;
  out.estimate.method = method_name(options.method);
  for (NodeId v : candidate_sources(g, ve, options.candidate_radius)) {
    out.candidates.push_back(score_candidate(g, v, ve, params, options));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : out.candidates) best = std::max(best, s.log_likelihood);
  const double slack = std::abs(best) * kScoreTieTolerance;
  for (const auto& s : out.candidates) {
    if (s.log_likelihood >= best - slack) {
      out.estimate.estimators.push_back(s.node);
      if (g.degree(s.node) <= 1) out.boundary = true;
    }
  }
  out.estimate.score = best;
  return out;
}

}  // namespace srcest
