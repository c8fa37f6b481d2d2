#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "srcest/errors.hpp"
#include "srcest/generators.hpp"
#include "srcest/graph.hpp"
#include "srcest/path_oracle.hpp"
#include "srcest/random.hpp"
#include "srcest/si_model.hpp"
#include "srcest/tree_estimator.hpp"
#include "srcest/trees.hpp"

// Randomized checks of the tree results against exhaustive path enumeration.
// Every instance is a small random tree with boundary stubs that lift all
// nodes to degree two, standing in for the unbounded tree the results are
// stated for.

namespace srcest {

struct OracleSuiteOptions {
  std::size_t trees = 100;
  std::size_t min_nodes = 3;
  std::size_t max_nodes = 8;
  std::size_t samples_per_tree = 2;  // (p, q) draws per tree
  std::uint64_t seed = 42;
  // Draw q below max(0, 2 - 1/p). The band is what the path results rely on,
  // so their failures are then reported as informational.
  bool q_below_band = false;
  // Path-enumeration properties (latest-path optimality, non-observable
  // pruning) are the slow part; they can be skipped.
  bool enumerate_paths = true;
  OracleLimits limits;
};

enum class PropertyStatus { pass, fail, info };

inline const char* status_name(PropertyStatus s) {
  switch (s) {
    case PropertyStatus::pass: return "PASS";
    case PropertyStatus::fail: return "FAIL";
    case PropertyStatus::info: return "INFO";
  }
  return "?";
}

struct PropertyReport {
  std::string name;
  PropertyStatus status = PropertyStatus::pass;
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::string counterexample;  // first violation
  std::string note;
};

struct OracleSuiteReport {
  std::vector<PropertyReport> properties;
  std::size_t instances = 0;
  // Instances with two tied centers where the ML set is only one of them.
  std::size_t jordan_pair_partial = 0;
  bool informational = false;

  bool ok() const {
    return std::none_of(properties.begin(), properties.end(),
                        [](const PropertyReport& p) { return p.status == PropertyStatus::fail; });
  }
  const PropertyReport* find(const std::string& name) const {
    for (const auto& p : properties) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
};

struct OracleInstance {
  Graph graph;
  ObservationSet ve;
  SIParams<double> params;
  std::vector<int> stubs;

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "nodes=" << graph.node_count() << " edges=";
    for (auto [a, b] : graph.edges()) os << a << '-' << b << ' ';
    os << "ve=";
    for (NodeId u : ve) os << u << ' ';
    os << "p=" << params.p << " q=";
    for (double q : params.q) os << q << ' ';
    return os.str();
  }
};

namespace detail {

inline bool log_close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline std::vector<NodeId> span_nodes(const ObservationSet& ve, NodeId v) {
  std::vector<NodeId> nodes(ve.begin(), ve.end());
  nodes.push_back(v);
  return nodes;
}

class SuiteRecorder {
 public:
  explicit SuiteRecorder(std::string name) { report_.name = std::move(name); }

  void check(bool holds, const OracleInstance& inst, const std::string& detail) {
    ++report_.checks;
    if (holds) return;
    if (report_.violations++ == 0) report_.counterexample = inst.describe() + detail;
  }

  PropertyReport finish(bool informational, const std::string& note = {}) {
    if (report_.violations > 0) report_.status = informational ? PropertyStatus::info : PropertyStatus::fail;
    if (informational) report_.note = note;
    return report_;
  }

 private:
  PropertyReport report_;
};

}  // namespace detail

inline OracleInstance sample_oracle_instance(Rng& rng, std::size_t n) {
  OracleInstance inst;
  inst.graph = random_labelled_tree(rng, n);
  std::vector<NodeId> ve;
  while (ve.empty()) {
    for (NodeId u = 0; static_cast<std::size_t>(u) < n; ++u) {
      if (bernoulli(rng, 0.5)) ve.push_back(u);
    }
  }
  inst.ve = ObservationSet(std::move(ve));
  inst.stubs = degree_padding(inst.graph, 2);
  return inst;
}

// p uniform on (0.05, 0.95) and q_u uniform on [max(floor, 0.05), 1]; with
// q_below_band, p on (0.6, 0.95) and q_u strictly inside (0.01, floor).
inline void sample_oracle_params(Rng& rng, OracleInstance& inst, bool q_below_band) {
  const std::size_t n = inst.graph.node_count();
  auto& params = inst.params;
  params.p = q_below_band ? uniform_real(rng, 0.6, 0.95) : uniform_real(rng, 0.05, 0.95);
  params.q.assign(n, 0.0);
  const double floor = params.q_floor();
  for (auto& q : params.q) {
    q = q_below_band ? uniform_real(rng, 0.01, floor * 0.95) : uniform_real(rng, std::max(floor, 0.05), 1.0);
  }
}

inline OracleSuiteReport run_oracle_suite(const OracleSuiteOptions& options) {
  if (options.max_nodes > options.limits.max_nodes) {
    throw ScaleRefusal("oracle guard: at most " + std::to_string(options.limits.max_nodes) +
                       " nodes per instance, asked for " + std::to_string(options.max_nodes));
  }
  if (options.min_nodes < 2 || options.min_nodes > options.max_nodes) {
    throw ArgumentError("need 2 <= min_nodes <= max_nodes");
  }
  const int t_cap = options.limits.max_horizon;
  const bool info = options.q_below_band;

  detail::SuiteRecorder optimality("latest-path-optimality");
  detail::SuiteRecorder pruning("non-observable-pruning");
  detail::SuiteRecorder monotone("monotonicity");
  detail::SuiteRecorder dominance("neighbor-dominance");
  detail::SuiteRecorder jordan("ml-source-is-jordan-center");
  detail::SuiteRecorder jce_check("jce-in-jordan-set");

  OracleSuiteReport report;
  report.informational = info;
  for (std::size_t k = 0; k < options.trees; ++k) {
    Rng rng = make_stream(options.seed, k);
    const auto n = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(options.min_nodes),
                                                        static_cast<std::int64_t>(options.max_nodes)));
    OracleInstance inst = sample_oracle_instance(rng, n);
    const Graph& g = inst.graph;
    const SourceEstimate centers = jordan_centers_exhaustive(g, inst.ve);
    const std::vector<int> range = infection_ranges(g, inst.ve);

    const JceOutcome jce_run = jce_on_tree(g, inst.ve);
    jce_check.check(centers.contains(jce_run.estimate.pick()), inst,
                    " jce=" + std::to_string(jce_run.estimate.pick()));

    for (std::size_t s = 0; s < options.samples_per_tree; ++s) {
      sample_oracle_params(rng, inst, options.q_below_band);
      ++report.instances;
      auto latest = [&](NodeId v, int t) {
        return path_log_probability(g, latest_infection_path(g, v, t, inst.ve), inst.params, inst.stubs);
      };

      for (NodeId v = 0; static_cast<std::size_t>(v) < n; ++v) {
        const int r = range[static_cast<std::size_t>(v)];
        for (int t = r; t < r + 3; ++t) {
          const double now = latest(v, t);
          const double next = latest(v, t + 1);
          monotone.check(next < now, inst,
                         " v=" + std::to_string(v) + " t=" + std::to_string(t) + " log P(t)=" +
                             std::to_string(now) + " log P(t+1)=" + std::to_string(next));
        }
        const Subgraph h = minimal_spanning_subtree(g, detail::span_nodes(inst.ve, v));
        for (NodeId lu : h.graph.neighbors(h.local(v))) {
          const NodeId u = h.global(lu);
          if (range[static_cast<std::size_t>(v)] >= range[static_cast<std::size_t>(u)]) continue;
          const double pv = latest(v, range[static_cast<std::size_t>(v)]);
          const double pu = latest(u, range[static_cast<std::size_t>(u)]);
          dominance.check(pv > pu, inst,
                          " v=" + std::to_string(v) + " u=" + std::to_string(u) + " log P_v=" + std::to_string(pv) +
                              " log P_u=" + std::to_string(pu));
        }
      }

      // Two adjacent tied Jordan centers act as one virtual source, so the
      // likelihood may favour either of them.
      const int horizon = std::min(t_cap, static_cast<int>(centers.score) + 3);
      const MlPathSearch ml = brute_force_ml_path_source(g, inst.ve, inst.params, horizon, options.limits, inst.stubs);
      const auto& found = ml.estimate.estimators;
      const bool subset = std::all_of(found.begin(), found.end(), [&](NodeId u) { return centers.contains(u); });
      const bool holds = centers.estimators.size() == 1 ? found == centers.estimators : (!found.empty() && subset);
      std::string got;
      for (NodeId u : found) got += std::to_string(u) + ' ';
      std::string want;
      for (NodeId u : centers.estimators) want += std::to_string(u) + ' ';
      jordan.check(holds, inst, " ml={" + got + "} jordan={" + want + "}");
      if (holds && found != centers.estimators) ++report.jordan_pair_partial;

      if (!options.enumerate_paths) continue;

      PathEnumerationOptions padded;
      padded.stubs = inst.stubs;
      for (NodeId v = 0; static_cast<std::size_t>(v) < n; ++v) {
        const int r = range[static_cast<std::size_t>(v)];
        const Subgraph h = minimal_spanning_subtree(g, detail::span_nodes(inst.ve, v));
        PathEnumerationOptions confined = padded;
        confined.forbidden.assign(n, 1);
        for (NodeId u : h.to_global) confined.forbidden[static_cast<std::size_t>(u)] = 0;
        for (int t = r; t <= std::min(r + 2, t_cap); ++t) {
          const auto best = most_likely_path(g, v, t, inst.ve, inst.params, padded);
          const std::string where = " v=" + std::to_string(v) + " t=" + std::to_string(t);
          if (!best.feasible) {
            optimality.check(false, inst, where + " no consistent path");
            continue;
          }
          const double oracle = std::log(best.probability);
          const double closed = latest(v, t);
          optimality.check(detail::log_close(oracle, closed), inst,
                           where + " oracle=" + std::to_string(oracle) + " latest=" + std::to_string(closed));
          const auto inside = most_likely_path(g, v, t, inst.ve, inst.params, confined);
          const double pruned = inside.feasible ? std::log(inside.probability) : -std::numeric_limits<double>::infinity();
          pruning.check(detail::log_close(oracle, pruned), inst,
                        where + " unconstrained=" + std::to_string(oracle) + " confined=" + std::to_string(pruned));
        }
      }

    }
  }

  const std::string note = "q below max(0, 2 - 1/p): not guaranteed, informational";
  report.properties.push_back(optimality.finish(info, note));
  report.properties.push_back(pruning.finish(info, note));
  report.properties.push_back(monotone.finish(info, note));
  report.properties.push_back(dominance.finish(info, note));
  report.properties.push_back(jordan.finish(info, note));
  report.properties.push_back(jce_check.finish(false));
  if (info) {
    for (auto& p : report.properties) {
      if (p.name != "jce-in-jordan-set" && p.status == PropertyStatus::pass) {
        p.status = PropertyStatus::info;
        p.note = note;
      }
    }
  }
  return report;
}

}  // namespace srcest
