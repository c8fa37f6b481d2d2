#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "srcest/errors.hpp"
#include "srcest/generators.hpp"
#include "srcest/graph.hpp"
#include "srcest/methods.hpp"
#include "srcest/random.hpp"
#include "srcest/si_model.hpp"
#include "srcest/trees.hpp"

#ifndef SRCEST_VERSION
#define SRCEST_VERSION "dev"
#endif

namespace srcest {

inline constexpr const char* kToolVersion = SRCEST_VERSION;

enum class NetworkKind { regular_tree, random1_tree, random2_tree, small_world, edge_list };
enum class QPolicy { eq1_uniform, explicit_ratio };

inline std::string network_name(NetworkKind k) {
  switch (k) {
    case NetworkKind::regular_tree: return "regular-tree";
    case NetworkKind::random1_tree: return "random1-tree";
    case NetworkKind::random2_tree: return "random2-tree";
    case NetworkKind::small_world: return "small-world";
    case NetworkKind::edge_list: return "edge-list";
  }
  return "?";
}

// 64-bit FNV-1a of a string, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct ExperimentConfig {
  NetworkKind network = NetworkKind::random2_tree;
  std::string graph_file;           // edge-list networks
  std::size_t tree_budget = 5000;
  std::size_t sw_n = 5000;
  int sw_k = 4;
  double sw_beta = 0.1;
  std::size_t runs = 1000;
  int threshold = 200;              // stop once more than this many nodes are infected
  double p_low = 0.0;               // p ~ U(p_low, p_high), open at both ends
  double p_high = 1.0;
  QPolicy q_policy = QPolicy::eq1_uniform;
  double explicit_ratio = 1.0;
  std::vector<Method> methods{Method::jce, Method::dc, Method::cc, Method::bc};
  std::uint64_t seed = 42;
  int candidate_radius = -1;        // rg/oracle candidate ball; negative = whole component
  ScoreMode score = ScoreMode::tree_formula;
  std::size_t threads = 0;          // 0 = hardware concurrency

  // Throws ConfigError on an inconsistent configuration.
  void validate() const {
    if (runs < 1) throw ConfigError("runs must be at least 1");
    if (threshold < 1) throw ConfigError("threshold must be at least 1");
    if (!(p_low >= 0.0 && p_low < p_high && p_high <= 1.0)) throw ConfigError("need 0 <= p_low < p_high <= 1");
    if (q_policy == QPolicy::explicit_ratio && !(explicit_ratio > 0.0 && explicit_ratio <= 1.0)) {
      throw ConfigError("explicit_ratio must lie in (0,1]");
    }
    if (methods.empty()) throw ConfigError("no methods configured");
    if (network == NetworkKind::edge_list && graph_file.empty()) throw ConfigError("edge-list network needs graph_file");
    const bool tree = network != NetworkKind::small_world && network != NetworkKind::edge_list;
    if (!tree && std::find(methods.begin(), methods.end(), Method::jce) != methods.end()) {
      throw ConfigError("tree method on general graph: jce needs a tree network");
    }
    if (tree && tree_budget <= static_cast<std::size_t>(threshold)) {
      throw ConfigError("tree_budget must exceed the infection threshold");
    }
    if (network == NetworkKind::small_world && sw_n <= static_cast<std::size_t>(threshold)) {
      throw ConfigError("small-world n must exceed the infection threshold");
    }
  }

  // Canonical key=value text of every setting, sorted by key.
  std::string canonical() const {
    std::map<std::string, std::string> kv;
    auto num = [](double x) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return std::string(buf);
    };
    kv["network"] = network_name(network);
    kv["graph_file"] = graph_file;
    kv["tree_budget"] = std::to_string(tree_budget);
    kv["sw_n"] = std::to_string(sw_n);
    kv["sw_k"] = std::to_string(sw_k);
    kv["sw_beta"] = num(sw_beta);
    kv["runs"] = std::to_string(runs);
    kv["threshold"] = std::to_string(threshold);
    kv["p_low"] = num(p_low);
    kv["p_high"] = num(p_high);
    kv["q_policy"] = q_policy == QPolicy::eq1_uniform ? "eq1-uniform" : "explicit-ratio";
    kv["explicit_ratio"] = num(explicit_ratio);
    std::string ms;
    for (Method m : methods) ms += (ms.empty() ? "" : ",") + std::string(method_name(m));
    kv["methods"] = ms;
    kv["seed"] = std::to_string(seed);
    kv["candidate_radius"] = std::to_string(candidate_radius);
    kv["score"] = score == ScoreMode::exact_path ? "exact-path" : "tree-formula";
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
  }

  // FNV-1a of the canonical text, as 16 hex digits. Thread count is left out
  // on purpose: it does not change results.
  std::string hash() const { return fnv1a_hex(canonical()); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Reads `key = value` lines; '#' starts a comment. Errors carry line numbers.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    auto fail = [&](const std::string& why) -> ConfigError {
      return ConfigError("config line " + std::to_string(line_no) + ": " + why);
    };
    if (eq == std::string::npos) throw fail("expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (value.empty()) throw fail("empty value for '" + key + "'");
    auto to_ull = [&]() {
      std::size_t used = 0;
      unsigned long long x = 0;
      try {
        if (value.front() == '-') throw std::invalid_argument("negative");
        x = std::stoull(value, &used);
      } catch (const std::exception&) {
        throw fail("'" + key + "' needs a non-negative integer, got '" + value + "'");
      }
      if (used != value.size()) throw fail("'" + key + "' needs a non-negative integer, got '" + value + "'");
      return x;
    };
    auto to_int = [&]() {
      std::size_t used = 0;
      int x = 0;
      try {
        x = std::stoi(value, &used);
      } catch (const std::exception&) {
        throw fail("'" + key + "' needs an integer, got '" + value + "'");
      }
      if (used != value.size()) throw fail("'" + key + "' needs an integer, got '" + value + "'");
      return x;
    };
    auto to_double = [&]() {
      std::size_t used = 0;
      double x = 0;
      try {
        x = std::stod(value, &used);
      } catch (const std::exception&) {
        throw fail("'" + key + "' needs a number, got '" + value + "'");
      }
      if (used != value.size()) throw fail("'" + key + "' needs a number, got '" + value + "'");
      return x;
    };

    if (key == "network") {
      if (value == "regular-tree") cfg.network = NetworkKind::regular_tree;
      else if (value == "random1-tree") cfg.network = NetworkKind::random1_tree;
      else if (value == "random2-tree") cfg.network = NetworkKind::random2_tree;
      else if (value == "small-world") cfg.network = NetworkKind::small_world;
      else if (value == "edge-list") cfg.network = NetworkKind::edge_list;
      else throw fail("unknown network '" + value + "'");
    } else if (key == "graph_file") {
      cfg.graph_file = value;
    } else if (key == "tree_budget") {
      cfg.tree_budget = to_ull();
    } else if (key == "sw_n") {
      cfg.sw_n = to_ull();
    } else if (key == "sw_k") {
      cfg.sw_k = to_int();
    } else if (key == "sw_beta") {
      cfg.sw_beta = to_double();
    } else if (key == "runs") {
      cfg.runs = to_ull();
    } else if (key == "threshold") {
      cfg.threshold = to_int();
    } else if (key == "p_low") {
      cfg.p_low = to_double();
    } else if (key == "p_high") {
      cfg.p_high = to_double();
    } else if (key == "q_policy") {
      if (value == "eq1-uniform") cfg.q_policy = QPolicy::eq1_uniform;
      else if (value == "explicit-ratio") cfg.q_policy = QPolicy::explicit_ratio;
      else throw fail("unknown q_policy '" + value + "'");
    } else if (key == "explicit_ratio") {
      cfg.explicit_ratio = to_double();
    } else if (key == "methods") {
      cfg.methods.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          cfg.methods.push_back(parse_method(detail::trim(item)));
        } catch (const ArgumentError& e) {
          throw fail(e.what());
        }
      }
    } else if (key == "seed") {
      cfg.seed = to_ull();
    } else if (key == "candidate_radius") {
      cfg.candidate_radius = to_int();
    } else if (key == "score") {
      if (value == "tree-formula") cfg.score = ScoreMode::tree_formula;
      else if (value == "exact-path") cfg.score = ScoreMode::exact_path;
      else throw fail("unknown score '" + value + "'");
    } else if (key == "threads") {
      cfg.threads = to_ull();
    } else {
      throw fail("unknown key '" + key + "'");
    }
  }
  return cfg;
}

struct MethodOutcome {
  Method method = Method::dc;
  NodeId estimate = kNoNode;      // deterministic pick: lowest id among ties
  int error_distance = 0;         // hops from the true source to the pick
  int tie_error_distance = 0;     // min hops from the true source to any tied optimum
  std::size_t ties = 1;
};

struct RunRecord {
  std::size_t run = 0;
  double p = 0.0;
  NodeId true_source = kNoNode;
  std::size_t n_infected = 0;
  std::size_t n_explicit = 0;
  bool boundary = false;          // the infection reached a degree-1 node
  std::size_t resamples = 0;      // spreads redrawn because V_e came out empty
  std::vector<MethodOutcome> outcomes;
};

struct MethodSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double ci95 = 0.0;              // half-width, normal approximation
  double mean_tie_min = 0.0;
  std::size_t interior_count = 0; // runs without the boundary flag
  double interior_mean = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> records;
  std::map<std::string, MethodSummary> summary;
  std::size_t total_resamples = 0;
  std::size_t boundary_runs = 0;
  std::size_t graph_attempts = 0; // small-world generations (connected or not)
};

namespace detail {

struct Network {
  Graph graph;
  NodeId source = kNoNode;  // fixed by the generator, or kNoNode to draw uniformly
  std::size_t attempts = 1;
};

// Synthetic trees are grown outward from the source, which stands in for an
// unbounded tree around it; ids are then shuffled so that the source's id
// carries no information.
inline Network sample_network(const ExperimentConfig& cfg, Rng& rng, const Graph* loaded) {
  Network net;
  switch (cfg.network) {
    case NetworkKind::regular_tree: net.graph = gen_regular_tree(rng, cfg.tree_budget).graph; break;
    case NetworkKind::random1_tree: net.graph = gen_random_tree(rng, RandomTreeMode::random1, cfg.tree_budget); break;
    case NetworkKind::random2_tree: net.graph = gen_random_tree(rng, RandomTreeMode::random2, cfg.tree_budget); break;
    case NetworkKind::small_world: {
      SmallWorld sw = gen_small_world(rng, cfg.sw_n, cfg.sw_k, cfg.sw_beta);
      net.graph = std::move(sw.graph);
      net.attempts = sw.attempts;
      return net;
    }
    case NetworkKind::edge_list: net.graph = *loaded; return net;
  }
  const std::vector<NodeId> perm = random_permutation(rng, net.graph.node_count());
  net.graph = permute_nodes(net.graph, perm);
  net.source = perm[0];
  return net;
}

// Error distances are measured on the spread graph, from the true source.
inline RunRecord run_once(const ExperimentConfig& cfg, std::size_t index, const Graph* loaded,
                          std::size_t& attempts) {
  Rng rng = make_stream(cfg.seed, index);
  const Network net = sample_network(cfg, rng, loaded);
  attempts = net.attempts;
  const Graph& g = net.graph;
  if (g.node_count() <= static_cast<std::size_t>(cfg.threshold)) {
    throw ConfigError("graph has " + std::to_string(g.node_count()) + " nodes, not above the threshold " +
                      std::to_string(cfg.threshold));
  }

  RunRecord rec;
  rec.run = index;
  rec.true_source = net.source != kNoNode
                        ? net.source
                        : static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(g.node_count()) - 1));
  double p = 0.0;
  while (p <= cfg.p_low || p >= cfg.p_high) p = uniform_real(rng, cfg.p_low, cfg.p_high);
  rec.p = p;

  SIParams<double> truth = SIParams<double>::uniform(p, 1.0, g.node_count());
  SIParams<double> assumed;
  if (cfg.q_policy == QPolicy::eq1_uniform) {
    const double floor = truth.q_floor();
    for (auto& q : truth.q) q = uniform_real(rng, floor, 1.0);
    truth.check(g.node_count());
    assumed = truth;
  } else {
    // q does not drive explicitness here; the estimators get q = r, kept
    // off 0 and 1 so every likelihood term stays finite.
    const double r = std::clamp(cfg.explicit_ratio, 0.01, 0.99);
    assumed = SIParams<double>::uniform(p, r, g.node_count());
  }

  InfectionPath path;
  ObservationSet ve;
  while (true) {
    path = simulate(g, rec.true_source, truth, StopRule::when_infected_above(cfg.threshold), rng).path;
    if (cfg.q_policy == QPolicy::eq1_uniform) {
      ve = path.observation();
    } else {
      std::vector<NodeId> infected;
      for (NodeId u = 0; static_cast<std::size_t>(u) < g.node_count(); ++u) {
        if (path.infected_by(u, path.horizon)) infected.push_back(u);
      }
      const auto k = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(cfg.explicit_ratio * static_cast<double>(infected.size()))));
      // Partial Fisher-Yates: the first k entries become the explicit nodes.
      for (std::size_t i = 0; i < k; ++i) {
        const auto j = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(i),
                                                            static_cast<std::int64_t>(infected.size()) - 1));
        std::swap(infected[i], infected[j]);
      }
      infected.resize(k);
      ve = ObservationSet(std::move(infected));
    }
    if (!ve.empty()) break;
    ++rec.resamples;
  }
  rec.n_infected = path.infected_count();
  rec.n_explicit = ve.size();
  for (NodeId u = 0; static_cast<std::size_t>(u) < g.node_count(); ++u) {
    if (path.infected_by(u, path.horizon) && g.degree(u) <= 1) rec.boundary = true;
  }

  const DistanceMap from_source = bfs_distances(g, rec.true_source);
  EstimateOptions options;
  options.general.candidate_radius = cfg.candidate_radius;
  options.general.score = cfg.score;
  for (Method m : cfg.methods) {
    SourceEstimate est;
    if (m == Method::bc && ve.size() < 2) {
      // No explicit pairs: every node scores 0, so fall back to the lone observation.
      est.method = "bc";
      est.estimators = {ve.nodes().front()};
    } else {
      est = estimate_source(g, ve, assumed, m, options);
    }
    MethodOutcome o;
    o.method = m;
    o.estimate = est.pick();
    o.error_distance = from_source[o.estimate];
    o.tie_error_distance = o.error_distance;
    for (NodeId u : est.estimators) o.tie_error_distance = std::min(o.tie_error_distance, from_source[u]);
    o.ties = est.estimators.size();
    rec.outcomes.push_back(o);
  }
  return rec;
}

}  // namespace detail

inline std::map<std::string, MethodSummary> summarize(const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
  std::map<std::string, MethodSummary> out;
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    MethodSummary s;
    double sum = 0.0;
    double sum_sq = 0.0;
    double tie_sum = 0.0;
    double interior_sum = 0.0;
    for (const auto& r : records) {
      const auto& o = r.outcomes[k];
      ++s.count;
      sum += o.error_distance;
      sum_sq += static_cast<double>(o.error_distance) * o.error_distance;
      tie_sum += o.tie_error_distance;
      if (!r.boundary) {
        ++s.interior_count;
        interior_sum += o.error_distance;
      }
    }
    if (s.count > 0) {
      const auto n = static_cast<double>(s.count);
      s.mean = sum / n;
      s.mean_tie_min = tie_sum / n;
      s.stddev = s.count > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * s.mean * s.mean) / (n - 1.0))) : 0.0;
      s.ci95 = 1.96 * s.stddev / std::sqrt(n);
    }
    if (s.interior_count > 0) s.interior_mean = interior_sum / static_cast<double>(s.interior_count);
    out[std::string(method_name(cfg.methods[k]))] = s;
  }
  return out;
}

// Runs every configured repetition on a worker pool. Results are ordered by
// run index and depend only on the config (not on the thread count).
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const Graph* loaded = nullptr) {
  cfg.validate();
  if (cfg.network == NetworkKind::edge_list && loaded == nullptr) throw ConfigError("edge-list network needs a graph");
  ExperimentResult res;
  res.config = cfg;
  res.records.resize(cfg.runs);
  std::vector<std::size_t> attempts(cfg.runs, 0);

  std::size_t workers = cfg.threads > 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.runs) return;
      try {
        res.records[i] = detail::run_once(cfg, i, loaded, attempts[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cfg.runs;
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 0; i < cfg.runs; ++i) {
    res.total_resamples += res.records[i].resamples;
    res.boundary_runs += res.records[i].boundary ? 1 : 0;
    res.graph_attempts += attempts[i];
  }
  res.summary = summarize(cfg, res.records);
  return res;
}

inline constexpr const char* kCsvHeader =
    "run,network,p,q_policy,true_source,method,estimate,error_distance,n_infected,n_explicit,boundary_flag";

// One row per (run, method). `labels` maps ids to output labels (identity if null).
inline void write_csv(std::ostream& out, const ExperimentResult& res, const LabelTable* labels = nullptr) {
  const ExperimentConfig& cfg = res.config;
  std::string policy = "eq1-uniform";
  if (cfg.q_policy == QPolicy::explicit_ratio) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "explicit-ratio:%g", cfg.explicit_ratio);
    policy = buf;
  }
  auto label = [&](NodeId u) { return labels ? labels->label(u) : std::to_string(u); };
  out << kCsvHeader << '\n';
  for (const auto& r : res.records) {
    char p[32];
    std::snprintf(p, sizeof p, "%.9f", r.p);
    for (const auto& o : r.outcomes) {
      out << r.run << ',' << network_name(cfg.network) << ',' << p << ',' << policy << ',' << label(r.true_source)
          << ',' << method_name(o.method) << ',' << label(o.estimate) << ',' << o.error_distance << ','
          << r.n_infected << ',' << r.n_explicit << ',' << (r.boundary ? 1 : 0) << '\n';
    }
  }
}

inline nlohmann::json summary_json(const ExperimentResult& res) {
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& [name, s] : res.summary) {
    methods[name] = {{"count", s.count},
                     {"mean", s.mean},
                     {"stddev", s.stddev},
                     {"ci95", s.ci95},
                     {"mean_tie_min", s.mean_tie_min},
                     {"interior_count", s.interior_count},
                     {"interior_mean", s.interior_count ? nlohmann::json(s.interior_mean) : nlohmann::json(nullptr)}};
  }
  return {{"version", kToolVersion},
          {"seed", res.config.seed},
          {"config_hash", res.config.hash()},
          {"network", network_name(res.config.network)},
          {"runs", res.config.runs},
          {"resamples", res.total_resamples},
          {"boundary_runs", res.boundary_runs},
          {"graph_attempts", res.graph_attempts},
          {"methods", std::move(methods)}};
}

}  // namespace srcest
