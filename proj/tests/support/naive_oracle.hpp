#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "srcest/srcest.hpp"

// A deliberately plain path enumerator for cross-checking the library. It
// walks slot by slot, gives every susceptible node its three transitions
// (stay, infected, infected and explicit) and multiplies the transition
// probabilities as it goes. No pruning, no shared code with the library
// beyond the Graph type.

namespace naive {

using srcest::Graph;
using srcest::NodeId;

enum Cell : char { kUninfected = 0, kHidden = 1, kShown = 2 };

template <typename Real>
struct Path {
  std::vector<int> time;    // -1 when never infected
  std::vector<char> shown;  // 1 when infected and explicit
  Real probability;

  srcest::InfectionPath to_library(NodeId source, int horizon) const {
    srcest::InfectionPath x = srcest::InfectionPath::empty(time.size(), source, horizon);
    for (std::size_t u = 0; u < time.size(); ++u) {
      x.infection_time[u] = time[u] < 0 ? srcest::kNeverInfected : time[u];
      x.explicit_flag[u] = shown[u];
    }
    return x;
  }
};

// Calls visit(path) for every path from `source` over slots 0..horizon.
// stubs[u] virtual neighbors of u stay susceptible forever once u is infected.
template <typename Real, typename Visit>
void all_paths(const Graph& g, NodeId source, int horizon, Real p, const std::vector<Real>& q,
               const std::vector<int>& stubs, Visit&& visit) {
  const std::size_t n = g.node_count();
  std::vector<char> cell(n, kUninfected);
  std::vector<int> time(n, -1);
  const Real one(1);

  std::function<void(int, Real)> slot;
  std::function<void(int, const std::vector<NodeId>&, std::size_t, Real)> decide;

  slot = [&](int tau, Real prob) {
    if (tau > horizon) {
      std::vector<char> shown(n, 0);
      for (std::size_t u = 0; u < n; ++u) shown[u] = cell[u] == kShown;
      visit(Path<Real>{time, std::move(shown), prob});
      return;
    }
    std::vector<NodeId> susceptible;
    for (NodeId u = 0; static_cast<std::size_t>(u) < n; ++u) {
      if (cell[static_cast<std::size_t>(u)] != kUninfected) continue;
      bool exposed = false;
      for (NodeId w : g.neighbors(u)) {
        const int tw = time[static_cast<std::size_t>(w)];
        exposed = exposed || (tw >= 0 && tw <= tau - 1);
      }
      if (exposed) susceptible.push_back(u);
    }
    for (std::size_t u = 0; u < n; ++u) {
      if (time[u] >= 0 && time[u] <= tau - 1 && !stubs.empty()) {
        for (int k = 0; k < stubs[u]; ++k) prob *= one - p;
      }
    }
    decide(tau, susceptible, 0, prob);
  };

  decide = [&](int tau, const std::vector<NodeId>& sus, std::size_t i, Real prob) {
    if (i == sus.size()) {
      slot(tau + 1, prob);
      return;
    }
    const auto u = static_cast<std::size_t>(sus[i]);
    decide(tau, sus, i + 1, prob * (one - p));
    time[u] = tau;
    cell[u] = kHidden;
    decide(tau, sus, i + 1, prob * p * (one - q[u]));
    cell[u] = kShown;
    decide(tau, sus, i + 1, prob * p * q[u]);
    cell[u] = kUninfected;
    time[u] = -1;
  };

  const auto s = static_cast<std::size_t>(source);
  time[s] = 0;
  cell[s] = kHidden;
  slot(1, one - q[s]);
  cell[s] = kShown;
  slot(1, q[s]);
}

// Exactly the explicit set at the horizon is V_e.
template <typename Real>
bool consistent(const Path<Real>& x, const srcest::ObservationSet& ve) {
  for (std::size_t u = 0; u < x.time.size(); ++u) {
    if ((x.shown[u] != 0) != ve.contains(static_cast<NodeId>(u))) return false;
  }
  return true;
}

template <typename Real>
std::optional<Path<Real>> best_consistent(const Graph& g, NodeId source, int horizon, Real p,
                                          const std::vector<Real>& q, const srcest::ObservationSet& ve,
                                          const std::vector<int>& stubs = {}) {
  std::optional<Path<Real>> best;
  all_paths(g, source, horizon, p, q, stubs, [&](const Path<Real>& x) {
    if (consistent(x, ve) && (!best || best->probability < x.probability)) best = x;
  });
  return best;
}

}  // namespace naive
