#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "srcest/errors.hpp"
#include "srcest/graph.hpp"
#include "srcest/random.hpp"
#include "srcest/trees.hpp"

namespace srcest {

// Infection probability p and per-node explicitness probabilities q_u.
// Real is double in production; tests instantiate exact rationals.
template <typename Real = double>
struct SIParams {
  Real p{};
  std::vector<Real> q;

  static SIParams uniform(Real p, Real q, std::size_t node_count) {
    return SIParams{p, std::vector<Real>(node_count, q)};
  }

  // Lower edge of the admissible q band, max(0, 2 - 1/p).
  Real q_floor() const {
    const Real floor = Real(2) - Real(1) / p;
    return floor < Real(0) ? Real(0) : floor;
  }

  bool within_band(NodeId u) const {
    const Real& qu = q[static_cast<std::size_t>(u)];
    return !(qu < q_floor()) && !(Real(1) < qu);
  }

  // Throws ArgumentError if p is outside (0,1), any q_u outside [0,1], or
  // (when require_band) any q_u below max(0, 2 - 1/p).
  void check(std::size_t node_count, bool require_band = true) const {
    if (!(Real(0) < p) || !(p < Real(1))) throw ArgumentError("infection probability must lie in (0,1)");
    if (q.size() != node_count) {
      throw ArgumentError("expected " + std::to_string(node_count) + " explicitness probabilities, got " +
                          std::to_string(q.size()));
    }
    for (std::size_t u = 0; u < q.size(); ++u) {
      if (q[u] < Real(0) || Real(1) < q[u]) {
        throw ArgumentError("q of node " + std::to_string(u) + " outside [0,1]");
      }
      if (require_band && !within_band(static_cast<NodeId>(u))) {
        throw ArgumentError("q of node " + std::to_string(u) + " below max(0, 2 - 1/p)");
      }
    }
  }
};

enum class NodeState : char {
  susceptible,      // s: uninfected with an infected neighbor
  infected,         // i: infected, non-explicit
  explicit_seen,    // e: infected and explicit
  non_susceptible,  // n: uninfected, no infected neighbor
};

inline char state_letter(NodeState s) {
  switch (s) {
    case NodeState::susceptible: return 's';
    case NodeState::infected: return 'i';
    case NodeState::explicit_seen: return 'e';
    case NodeState::non_susceptible: return 'n';
  }
  return '?';
}

inline constexpr int kNeverInfected = std::numeric_limits<int>::max();

// An infection path X^t, stored as first-infection times plus an explicit
// flag per node. The s/n distinction is derived from the graph on demand.
struct InfectionPath {
  NodeId source = kNoNode;
  int horizon = 0;
  std::vector<int> infection_time;  // kNeverInfected when never infected by the horizon
  std::vector<char> explicit_flag;  // meaningful only for infected nodes

  static InfectionPath empty(std::size_t node_count, NodeId source, int horizon) {
    InfectionPath x;
    x.source = source;
    x.horizon = horizon;
    x.infection_time.assign(node_count, kNeverInfected);
    x.explicit_flag.assign(node_count, 0);
    x.infection_time[static_cast<std::size_t>(source)] = 0;
    return x;
  }

  int time(NodeId u) const { return infection_time[static_cast<std::size_t>(u)]; }
  bool infected_by(NodeId u, int slot) const { return time(u) <= slot; }
  bool is_explicit(NodeId u) const { return explicit_flag[static_cast<std::size_t>(u)] != 0; }

  NodeState state(const Graph& g, NodeId u, int slot) const {
    if (infected_by(u, slot)) return is_explicit(u) ? NodeState::explicit_seen : NodeState::infected;
    for (NodeId w : g.neighbors(u)) {
      if (infected_by(w, slot)) return NodeState::susceptible;
    }
    return NodeState::non_susceptible;
  }

  std::size_t infected_count() const {
    return static_cast<std::size_t>(std::count_if(infection_time.begin(), infection_time.end(),
                                                  [this](int t) { return t <= horizon; }));
  }

  // Explicit nodes at the horizon, i.e. the observation this path produces.
  ObservationSet observation() const {
    std::vector<NodeId> out;
    for (std::size_t u = 0; u < infection_time.size(); ++u) {
      if (infection_time[u] <= horizon && explicit_flag[u]) out.push_back(static_cast<NodeId>(u));
    }
    return ObservationSet(std::move(out));
  }

  friend bool operator==(const InfectionPath&, const InfectionPath&) = default;
};

// Earliest infection time among u's neighbors (kNeverInfected if none).
inline int earliest_neighbor_time(const Graph& g, const InfectionPath& x, NodeId u) {
  int m = kNeverInfected;
  for (NodeId w : g.neighbors(u)) m = std::min(m, x.time(w));
  return m;
}

// Throws ValidationError naming the first violated invariant.
inline void validate_path(const Graph& g, const InfectionPath& x) {
  const std::size_t n = g.node_count();
  if (x.infection_time.size() != n || x.explicit_flag.size() != n) {
    throw ValidationError("path size does not match graph");
  }
  if (!g.valid(x.source)) throw ValidationError("path source is not a valid node");
  if (x.horizon < 0) throw ValidationError("negative horizon");
  if (x.time(x.source) != 0) throw ValidationError("source is not infected at slot 0");
  for (NodeId u = 0; static_cast<std::size_t>(u) < n; ++u) {
    const int tu = x.time(u);
    if (u == x.source || tu == kNeverInfected) continue;
    if (tu <= 0) {
      throw ValidationError("node " + std::to_string(u) + " infected at slot " + std::to_string(tu) +
                            " besides the source");
    }
    if (tu > x.horizon) {
      throw ValidationError("node " + std::to_string(u) + " infected after the horizon");
    }
    if (earliest_neighbor_time(g, x, u) > tu - 1) {
      throw ValidationError("node " + std::to_string(u) + " infected at slot " + std::to_string(tu) +
                            " without an infected neighbor at slot " + std::to_string(tu - 1));
    }
  }
}

// Virtual, never-infected neighbors attached to real nodes. They stand in for
// the rest of an unbounded network: each stub of an infected node u stays
// susceptible from slot t_u to the horizon and contributes (1-p) per slot.
// Empty means the graph is taken as the whole network.
using BoundaryStubs = std::span<const int>;

// Stubs lifting every node to degree at least `min_degree`.
inline std::vector<int> degree_padding(const Graph& g, int min_degree = 2) {
  std::vector<int> stubs(g.node_count(), 0);
  for (NodeId u = 0; static_cast<std::size_t>(u) < g.node_count(); ++u) {
    stubs[static_cast<std::size_t>(u)] = std::max(0, min_degree - static_cast<int>(g.degree(u)));
  }
  return stubs;
}

namespace detail {

// Factor counts of a path probability: the source's explicitness factor,
// (1-p) for every slot a node stays susceptible, and p*q_u or p*(1-q_u) at
// each node's infection slot.
template <typename OnStay, typename OnInfect, typename OnSource>
void for_each_transition(const Graph& g, const InfectionPath& x, BoundaryStubs stubs,
                         OnStay&& on_stay, OnInfect&& on_infect, OnSource&& on_source) {
  on_source(x.source, x.is_explicit(x.source));
  for (NodeId u = 0; static_cast<std::size_t>(u) < g.node_count(); ++u) {
    if (!stubs.empty() && x.time(u) <= x.horizon) {
      const int k = stubs[static_cast<std::size_t>(u)];
      if (k > 0 && x.time(u) < x.horizon) on_stay(u, k * (x.horizon - x.time(u)));
    }
    if (u == x.source) continue;
    const int m = earliest_neighbor_time(g, x, u);
    if (m >= x.horizon) continue;  // never susceptible before the last slot
    const int tu = x.time(u);
    // u is susceptible at slots m..min(tu, horizon+1)-1; each stays at
    // slots m+1..tu-1 cost (1-p).
    const int last = std::min(tu, x.horizon + 1);
    const int stays = last - m - 1;
    if (stays > 0) on_stay(u, stays);
    if (tu <= x.horizon) on_infect(u, x.is_explicit(u));
  }
}

}  // namespace detail

// Exact probability of a path in any field-like Real (double, rationals).
template <typename Real>
Real path_probability(const Graph& g, const InfectionPath& x, const SIParams<Real>& params,
                      BoundaryStubs stubs = {}) {
  validate_path(g, x);
  Real prob(1);
  const Real one(1);
  detail::for_each_transition(
      g, x, stubs,
      [&](NodeId, int stays) {
        for (int k = 0; k < stays; ++k) prob *= (one - params.p);
      },
      [&](NodeId u, bool is_explicit) {
        const Real& qu = params.q[static_cast<std::size_t>(u)];
        prob *= params.p * (is_explicit ? qu : one - qu);
      },
      [&](NodeId s, bool is_explicit) {
        const Real& qs = params.q[static_cast<std::size_t>(s)];
        prob *= is_explicit ? qs : one - qs;
      });
  return prob;
}

// Natural log of the path probability; -inf for zero-probability paths.
inline double path_log_probability(const Graph& g, const InfectionPath& x, const SIParams<double>& params,
                                   BoundaryStubs stubs = {}) {
  validate_path(g, x);
  const double log_stay = std::log1p(-params.p);
  const double log_p = std::log(params.p);
  double total = 0.0;
  detail::for_each_transition(
      g, x, stubs, [&](NodeId, int stays) { total += stays * log_stay; },
      [&](NodeId u, bool is_explicit) {
        const double qu = params.q[static_cast<std::size_t>(u)];
        total += log_p + (is_explicit ? std::log(qu) : std::log1p(-qu));
      },
      [&](NodeId s, bool is_explicit) {
        const double qs = params.q[static_cast<std::size_t>(s)];
        total += is_explicit ? std::log(qs) : std::log1p(-qs);
      });
  return total;
}

// Every node of V_e is explicit at the horizon and nothing else ever is.
inline bool is_consistent(const InfectionPath& x, const ObservationSet& ve) {
  for (std::size_t u = 0; u < x.infection_time.size(); ++u) {
    const bool infected = x.infection_time[u] <= x.horizon;
    const bool shown = infected && x.explicit_flag[u];
    if (shown != ve.contains(static_cast<NodeId>(u))) return false;
  }
  return true;
}

// Feasible elapsed times [lower, infinity) for source v on a tree.
struct FeasibleTimes {
  int lower = 0;
  bool contains(int t) const { return t >= lower; }
};

inline FeasibleTimes feasible_times(const Graph& g, NodeId v, const ObservationSet& ve) {
  g.check_node(v);
  if (!component_is_tree(g, v)) throw StructureError("feasible_times requires a tree");
  return FeasibleTimes{infection_range(g, v, ve)};
}

// The latest infection path for (v, t) on a tree: only the minimal subtree H
// spanning V_e and v is ever infected, each u in H \ {v} at slot
// t - height of u's subtree in H rooted at v, explicit iff u is in V_e.
inline InfectionPath latest_infection_path(const Graph& g, NodeId v, int t, const ObservationSet& ve) {
  g.check_node(v);
  ve.check_against(g);
  const int lower = feasible_times(g, v, ve).lower;
  if (t < lower) {
    throw ArgumentError("elapsed time " + std::to_string(t) + " below the feasible minimum " +
                        std::to_string(lower));
  }
  std::vector<NodeId> span_nodes(ve.begin(), ve.end());
  span_nodes.push_back(v);
  const Subgraph h = minimal_spanning_subtree(g, span_nodes);
  const RootedTree rooted = root_tree(h.graph, h.local(v));
  const std::vector<int> height = subtree_heights(rooted);

  InfectionPath x = InfectionPath::empty(g.node_count(), v, t);
  for (NodeId local : rooted.preorder()) {
    const NodeId u = h.global(local);
    if (u != v) x.infection_time[static_cast<std::size_t>(u)] = t - height[static_cast<std::size_t>(local)];
    x.explicit_flag[static_cast<std::size_t>(u)] = ve.contains(u) ? 1 : 0;
  }
  return x;
}

// When to stop a simulation: after a fixed number of slots, or at the end of
// the first slot in which more than `value` nodes are infected.
struct StopRule {
  enum class Kind { horizon, infected_above };
  Kind kind = Kind::horizon;
  int value = 0;

  static StopRule at_horizon(int t) { return {Kind::horizon, t}; }
  static StopRule when_infected_above(int count) { return {Kind::infected_above, count}; }
};

struct SimulationResult {
  InfectionPath path;
  // Threshold stop only: the component ran out of susceptible nodes first.
  bool partial = false;
};

// Discrete-time SI spread from `source`. The source's own explicitness is
// drawn at slot 0; every other node draws it once, when infected.
inline SimulationResult simulate(const Graph& g, NodeId source, const SIParams<double>& params,
                                 StopRule stop, Rng& rng) {
  g.check_node(source);
  params.check(g.node_count(), /*require_band=*/false);
  if (stop.value < 0) throw ArgumentError("stop rule value must be non-negative");

  const std::size_t n = g.node_count();
  SimulationResult result;
  InfectionPath& x = result.path;
  x = InfectionPath::empty(n, source, 0);
  x.explicit_flag[static_cast<std::size_t>(source)] =
      bernoulli(rng, params.q[static_cast<std::size_t>(source)]) ? 1 : 0;

  std::vector<char> in_frontier(n, 0);
  std::vector<NodeId> frontier;
  auto push_neighbors = [&](NodeId u) {
    for (NodeId w : g.neighbors(u)) {
      const auto wi = static_cast<std::size_t>(w);
      if (x.infection_time[wi] == kNeverInfected && !in_frontier[wi]) {
        in_frontier[wi] = 1;
        frontier.push_back(w);
      }
    }
  };
  push_neighbors(source);

  std::size_t infected = 1;
  int slot = 0;
  std::vector<NodeId> newly;
  std::vector<NodeId> still;
  auto done = [&] {
    if (stop.kind == StopRule::Kind::horizon) return slot >= stop.value;
    return infected > static_cast<std::size_t>(stop.value);
  };
  while (!done()) {
    if (frontier.empty() && stop.kind == StopRule::Kind::infected_above) {
      result.partial = true;
      break;
    }
    ++slot;
    newly.clear();
    still.clear();
    for (NodeId u : frontier) {
      if (bernoulli(rng, params.p)) {
        newly.push_back(u);
      } else {
        still.push_back(u);
      }
    }
    for (NodeId u : newly) {
      const auto ui = static_cast<std::size_t>(u);
      x.infection_time[ui] = slot;
      x.explicit_flag[ui] = bernoulli(rng, params.q[ui]) ? 1 : 0;
      in_frontier[ui] = 0;
    }
    frontier.swap(still);
    for (NodeId u : newly) push_neighbors(u);
    infected += newly.size();
  }
  x.horizon = slot;
  return result;
}

inline void to_json(nlohmann::json& j, const InfectionPath& x) {
  std::vector<std::pair<int, NodeId>> order;
  for (std::size_t u = 0; u < x.infection_time.size(); ++u) {
    if (x.infection_time[u] <= x.horizon) order.emplace_back(x.infection_time[u], static_cast<NodeId>(u));
  }
  std::sort(order.begin(), order.end());
  nlohmann::json events = nlohmann::json::array();
  for (auto [slot, u] : order) {
    events.push_back({{"node", u}, {"slot", slot}, {"explicit", x.is_explicit(u)}});
  }
  j = {{"source", x.source}, {"t", x.horizon}, {"events", std::move(events)}};
}

// Needs the node count, so this is a factory rather than an ADL from_json.
inline InfectionPath infection_path_from_json(const nlohmann::json& j, std::size_t node_count) {
  const auto source = j.at("source").get<NodeId>();
  const int t = j.at("t").get<int>();
  if (source < 0 || static_cast<std::size_t>(source) >= node_count) {
    throw ValidationError("path source outside the graph");
  }
  InfectionPath x = InfectionPath::empty(node_count, source, t);
  x.infection_time[static_cast<std::size_t>(source)] = kNeverInfected;
  for (const auto& ev : j.at("events")) {
    const auto u = ev.at("node").get<NodeId>();
    if (u < 0 || static_cast<std::size_t>(u) >= node_count) throw ValidationError("event node outside the graph");
    x.infection_time[static_cast<std::size_t>(u)] = ev.at("slot").get<int>();
    x.explicit_flag[static_cast<std::size_t>(u)] = ev.at("explicit").get<bool>() ? 1 : 0;
  }
  return x;
}

}  // namespace srcest
