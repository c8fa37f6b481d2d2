#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "srcest/errors.hpp"
#include "srcest/graph.hpp"
#include "srcest/si_model.hpp"
#include "srcest/trees.hpp"

// Exhaustive enumeration of infection paths. This is the reference that the
// closed-form results (latest paths, Jordan centers) are checked against, so
// it uses nothing but the transition rules.

namespace srcest {

struct OracleLimits {
  std::size_t max_nodes = 8;
  int max_horizon = 4;

  void check(const Graph& g, int horizon) const {
    if (g.node_count() > max_nodes) {
      throw ScaleRefusal("path oracle limited to " + std::to_string(max_nodes) + " nodes, graph has " +
                         std::to_string(g.node_count()));
    }
    if (horizon > max_horizon) {
      throw ScaleRefusal("path oracle limited to horizon " + std::to_string(max_horizon) + ", asked for " +
                         std::to_string(horizon));
    }
  }
};

struct PathEnumerationOptions {
  // Nodes that may never be infected (the source excepted). Empty = none.
  std::vector<char> forbidden;
  BoundaryStubs stubs;
};

namespace detail {

template <typename Real, typename Visitor>
class PathEnumerator {
 public:
  PathEnumerator(const Graph& g, NodeId source, int horizon, const ObservationSet& ve,
                 const SIParams<Real>& params, const PathEnumerationOptions& options, Visitor& visit)
      : g_(g), ve_(ve), params_(params), options_(options), visit_(visit),
        path_(InfectionPath::empty(g.node_count(), source, horizon)),
        in_ve_(ve.mask(g.node_count())) {}

  void run() {
    const NodeId s = path_.source;
    const bool shown = in_ve_[static_cast<std::size_t>(s)] != 0;
    path_.explicit_flag[static_cast<std::size_t>(s)] = shown ? 1 : 0;
    const Real& qs = params_.q[static_cast<std::size_t>(s)];
    const Real start = shown ? qs : Real(1) - qs;
    if (!reachable_in_time(0)) return;
    step(1, start);
  }

 private:
  bool forbidden(NodeId u) const {
    return !options_.forbidden.empty() && options_.forbidden[static_cast<std::size_t>(u)];
  }

  // Can every uninfected explicit node still be reached by the horizon, given
  // the nodes infected up to `slot`?
  bool reachable_in_time(int slot) const {
    const std::size_t n = g_.node_count();
    std::vector<int> dist(n, kInfiniteDistance);
    std::vector<NodeId> queue;
    for (NodeId u = 0; static_cast<std::size_t>(u) < n; ++u) {
      if (path_.time(u) <= slot) {
        dist[static_cast<std::size_t>(u)] = 0;
        queue.push_back(u);
      }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId u = queue[head];
      for (NodeId w : g_.neighbors(u)) {
        auto& dw = dist[static_cast<std::size_t>(w)];
        if (dw == kInfiniteDistance && !forbidden(w)) {
          dw = dist[static_cast<std::size_t>(u)] + 1;
          queue.push_back(w);
        }
      }
    }
    const int remaining = path_.horizon - slot;
    for (NodeId e : ve_) {
      if (dist[static_cast<std::size_t>(e)] > remaining) return false;
    }
    return true;
  }

  Real stub_factor(int slot) const {
    // Stubs of nodes infected before `slot` each stay susceptible once more.
    if (options_.stubs.empty()) return Real(1);
    Real f(1);
    const Real stay = Real(1) - params_.p;
    for (NodeId u = 0; static_cast<std::size_t>(u) < g_.node_count(); ++u) {
      if (path_.time(u) <= slot - 1) {
        for (int k = 0; k < options_.stubs[static_cast<std::size_t>(u)]; ++k) f *= stay;
      }
    }
    return f;
  }

  void step(int slot, const Real& prob) {
    if (slot > path_.horizon) {
      visit_(static_cast<const InfectionPath&>(path_), prob);
      return;
    }
    // Susceptible at slot-1: uninfected with a neighbor infected by slot-1.
    std::vector<NodeId> susceptible;
    for (NodeId u = 0; static_cast<std::size_t>(u) < g_.node_count(); ++u) {
      if (path_.time(u) <= slot - 1) continue;
      for (NodeId w : g_.neighbors(u)) {
        if (path_.time(w) <= slot - 1) {
          susceptible.push_back(u);
          break;
        }
      }
    }
    const Real base = prob * stub_factor(slot);
    const std::size_t k = susceptible.size();
    const Real one(1);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      Real p = base;
      bool allowed = true;
      for (std::size_t i = 0; i < k; ++i) {
        const NodeId u = susceptible[i];
        const auto ui = static_cast<std::size_t>(u);
        if (mask >> i & 1U) {
          if (forbidden(u)) {
            allowed = false;
            break;
          }
          p *= params_.p * (in_ve_[ui] ? params_.q[ui] : one - params_.q[ui]);
        } else {
          p *= one - params_.p;
        }
      }
      if (!allowed) continue;
      for (std::size_t i = 0; i < k; ++i) {
        if (mask >> i & 1U) {
          const auto ui = static_cast<std::size_t>(susceptible[i]);
          path_.infection_time[ui] = slot;
          path_.explicit_flag[ui] = in_ve_[ui];
        }
      }
      if (reachable_in_time(slot)) step(slot + 1, p);
      for (std::size_t i = 0; i < k; ++i) {
        if (mask >> i & 1U) {
          const auto ui = static_cast<std::size_t>(susceptible[i]);
          path_.infection_time[ui] = kNeverInfected;
          path_.explicit_flag[ui] = 0;
        }
      }
    }
  }

  const Graph& g_;
  const ObservationSet& ve_;
  const SIParams<Real>& params_;
  const PathEnumerationOptions& options_;
  Visitor& visit_;
  InfectionPath path_;
  std::vector<char> in_ve_;
};

}  // namespace detail

// Calls visit(path, probability) for every infection path from `source` with
// horizon t that is consistent with V_e. Explicitness is forced by
// consistency, so paths differ only in who is infected when.
template <typename Real, typename Visitor>
void enumerate_consistent_paths(const Graph& g, NodeId source, int horizon, const ObservationSet& ve,
                                const SIParams<Real>& params, Visitor&& visit,
                                const PathEnumerationOptions& options = {}) {
  g.check_node(source);
  ve.check_against(g);
  if (horizon < 0) throw ArgumentError("negative horizon");
  detail::PathEnumerator<Real, std::remove_reference_t<Visitor>> e(g, source, horizon, ve, params, options,
                                                                   visit);
  e.run();
}

template <typename Real>
struct PathMaximum {
  bool feasible = false;
  Real probability{};
  InfectionPath path;
  std::size_t paths_seen = 0;
};

// Most likely consistent path for (source, t). Ties keep the first path found.
template <typename Real>
PathMaximum<Real> most_likely_path(const Graph& g, NodeId source, int horizon, const ObservationSet& ve,
                                   const SIParams<Real>& params, const PathEnumerationOptions& options = {}) {
  PathMaximum<Real> best;
  enumerate_consistent_paths(
      g, source, horizon, ve, params,
      [&](const InfectionPath& x, const Real& prob) {
        ++best.paths_seen;
        if (!best.feasible || best.probability < prob) {
          best.feasible = true;
          best.probability = prob;
          best.path = x;
        }
      },
      options);
  return best;
}

}  // namespace srcest
