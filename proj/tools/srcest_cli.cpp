#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "srcest/srcest.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Bad flag combinations that CLI11 cannot express; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphFlags {
  std::string file;
  std::string generator;
};

struct LoadedGraph {
  srcest::Graph graph;
  srcest::LabelTable labels;
};

using Settings = std::map<std::string, std::string>;

std::string join_settings(const Settings& s) {
  std::string out;
  for (const auto& [k, v] : s) out += k + "=" + v + "\n";
  return out;
}

json meta_block(std::uint64_t seed, const Settings& settings) {
  return {{"version", srcest::kToolVersion}, {"seed", seed}, {"config_hash", srcest::fnv1a_hex(join_settings(settings))}};
}

std::map<std::string, std::string> parse_args(const std::string& text) {
  std::map<std::string, std::string> args;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("generator argument '" + item + "' is not key=value");
    args[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return args;
}

// Generator strings look like "small-world:n=2000,k=4,beta=0.1".
srcest::Graph generate(const std::string& desc, std::uint64_t seed) {
  const auto colon = desc.find(':');
  const std::string kind = desc.substr(0, colon);
  auto args = parse_args(colon == std::string::npos ? "" : desc.substr(colon + 1));
  auto take_size = [&](const std::string& key, std::size_t fallback) -> std::size_t {
    auto it = args.find(key);
    if (it == args.end()) return fallback;
    const std::string v = it->second;
    args.erase(it);
    try {
      std::size_t used = 0;
      const auto x = std::stoull(v, &used);
      if (used == v.size() && v.front() != '-') return x;
    } catch (const std::exception&) {
    }
    throw UsageError("generator argument " + key + " needs a non-negative integer, got '" + v + "'");
  };
  auto take_double = [&](const std::string& key, double fallback) -> double {
    auto it = args.find(key);
    if (it == args.end()) return fallback;
    const std::string v = it->second;
    args.erase(it);
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError("generator argument " + key + " needs a number, got '" + v + "'");
  };

  srcest::Rng rng = srcest::make_stream(seed, 0);
  srcest::Graph g;
  if (kind == "regular-tree") {
    const auto degree = take_size("degree", 0);
    const auto budget = take_size("budget", 5000);
    g = degree == 0 ? srcest::gen_regular_tree(rng, budget).graph
                    : srcest::regular_tree(static_cast<int>(degree), budget);
  } else if (kind == "random1-tree" || kind == "random2-tree") {
    const auto mode = kind == "random1-tree" ? srcest::RandomTreeMode::random1 : srcest::RandomTreeMode::random2;
    g = srcest::gen_random_tree(rng, mode, take_size("budget", 5000));
  } else if (kind == "small-world") {
    const auto n = take_size("n", 5000);
    const auto k = take_size("k", 4);
    g = srcest::gen_small_world(rng, n, static_cast<int>(k), take_double("beta", 0.1)).graph;
  } else if (kind == "tree") {
    g = srcest::random_labelled_tree(rng, take_size("n", 8));
  } else if (kind == "path" || kind == "star") {
    const auto n = take_size("n", 5);
    if (n < 2) throw UsageError(kind + " generator needs n >= 2");
    std::vector<srcest::Edge> edges;
    for (std::size_t i = 1; i < n; ++i) {
      edges.emplace_back(kind == "path" ? static_cast<srcest::NodeId>(i - 1) : 0, static_cast<srcest::NodeId>(i));
    }
    g = srcest::Graph::from_edges(n, edges);
  } else {
    throw UsageError("unknown generator '" + kind +
                     "' (regular-tree, random1-tree, random2-tree, small-world, tree, path, star)");
  }
  if (!args.empty()) throw UsageError("unknown generator argument '" + args.begin()->first + "' for " + kind);
  return g;
}

LoadedGraph load_graph(const GraphFlags& flags, std::uint64_t seed, Settings& settings) {
  if (flags.file.empty() == flags.generator.empty()) throw UsageError("give exactly one of --graph or --generator");
  LoadedGraph out;
  if (!flags.file.empty()) {
    std::ifstream in(flags.file);
    if (!in) throw srcest::ConfigError("cannot open graph file '" + flags.file + "'");
    srcest::EdgeListResult r = srcest::read_edge_list(in);
    if (r.self_loops > 0) std::cerr << "warning: dropped " << r.self_loops << " self-loop(s)\n";
    out.graph = std::move(r.graph);
    out.labels = std::move(r.labels);
    settings["graph"] = flags.file;
  } else {
    out.graph = generate(flags.generator, seed);
    out.labels = srcest::LabelTable::identity(out.graph.node_count());
    settings["generator"] = flags.generator;
  }
  return out;
}

srcest::ObservationSet read_ve(const std::string& path, const srcest::LabelTable& labels) {
  std::ifstream in(path);
  if (!in) throw srcest::ConfigError("cannot open V_e file '" + path + "'");
  std::vector<srcest::NodeId> ids;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream tokens(line);
    std::string label;
    if (!(tokens >> label) || label.front() == '#') continue;
    ids.push_back(labels.id(label));
  }
  if (ids.empty()) throw srcest::ArgumentError("V_e file '" + path + "' lists no nodes");
  return srcest::ObservationSet(std::move(ids));
}

srcest::NodeId lookup(const srcest::LabelTable& labels, const std::string& label) { return labels.id(label); }

json label_list(const srcest::LabelTable& labels, std::span<const srcest::NodeId> ids) {
  json out = json::array();
  for (srcest::NodeId u : ids) out.push_back(labels.label(u));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw srcest::ConfigError("cannot write '" + path + "'");
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  GraphFlags graph;
  std::string source;
  double p = 0.5;
  double q = 0.5;
  std::optional<double> explicit_ratio;
  std::optional<int> horizon;
  int threshold = 200;
  std::uint64_t seed = 42;
  std::string out;
  std::string ve_out;
  std::string format = "json";
};

int run_simulate(const SimulateArgs& a) {
  Settings settings{{"command", "simulate"}, {"p", fmt(a.p)}, {"q", fmt(a.q)}, {"source", a.source}};
  const LoadedGraph lg = load_graph(a.graph, a.seed, settings);
  const srcest::Graph& g = lg.graph;
  srcest::Rng rng = srcest::make_stream(a.seed, 1);
  const srcest::NodeId source =
      a.source.empty() ? static_cast<srcest::NodeId>(srcest::uniform_int(rng, 0, static_cast<std::int64_t>(g.node_count()) - 1))
                       : lookup(lg.labels, a.source);
  auto params = srcest::SIParams<double>::uniform(a.p, a.explicit_ratio ? 1.0 : a.q, g.node_count());
  params.check(g.node_count());
  const auto stop = a.horizon ? srcest::StopRule::at_horizon(*a.horizon) : srcest::StopRule::when_infected_above(a.threshold);
  if (a.horizon) settings["horizon"] = std::to_string(*a.horizon);
  else settings["threshold"] = std::to_string(a.threshold);

  srcest::SimulationResult sim = srcest::simulate(g, source, params, stop, rng);
  srcest::InfectionPath& x = sim.path;
  if (a.explicit_ratio) {
    const double r = *a.explicit_ratio;
    if (!(r > 0.0 && r <= 1.0)) throw srcest::ArgumentError("explicit ratio must lie in (0,1]");
    settings["explicit_ratio"] = fmt(r);
    std::vector<srcest::NodeId> infected;
    for (srcest::NodeId u = 0; static_cast<std::size_t>(u) < g.node_count(); ++u) {
      x.explicit_flag[static_cast<std::size_t>(u)] = 0;
      if (x.infected_by(u, x.horizon)) infected.push_back(u);
    }
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(r * static_cast<double>(infected.size()))));
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(srcest::uniform_int(rng, static_cast<std::int64_t>(i),
                                                                  static_cast<std::int64_t>(infected.size()) - 1));
      std::swap(infected[i], infected[j]);
      x.explicit_flag[static_cast<std::size_t>(infected[i])] = 1;
    }
  }
  const srcest::ObservationSet ve = x.observation();

  if (!a.ve_out.empty()) {
    std::ofstream out(a.ve_out);
    if (!out) throw srcest::ConfigError("cannot write '" + a.ve_out + "'");
    for (srcest::NodeId u : ve) out << lg.labels.label(u) << '\n';
  }

  if (a.format == "csv") {
    std::ostringstream os;
    os << "node,slot,explicit\n";
    json events;
    srcest::to_json(events, x);
    for (const auto& ev : events.at("events")) {
      os << lg.labels.label(ev.at("node").get<srcest::NodeId>()) << ',' << ev.at("slot").get<int>() << ','
         << (ev.at("explicit").get<bool>() ? 1 : 0) << '\n';
    }
    write_text(a.out, os.str());
    return 0;
  }
  json path;
  srcest::to_json(path, x);
  json doc = {{"meta", meta_block(a.seed, settings)},
              {"path", path},
              {"source", lg.labels.label(source)},
              {"infected", x.infected_count()},
              {"partial", sim.partial},
              {"explicit", label_list(lg.labels, ve.nodes())},
              {"labels", lg.labels.labels()}};
  write_text(a.out, dump(doc));
  return 0;
}

// ---- estimate ---------------------------------------------------------------

struct EstimateArgs {
  GraphFlags graph;
  std::string ve;
  std::string method = "jce";
  double p = 0.5;
  double q = 0.5;
  std::optional<double> explicit_ratio;
  int candidate_radius = -1;
  std::string score = "tree-formula";
  bool no_prune = false;
  std::uint64_t seed = 42;
  std::string out;
  std::string format = "json";
};

int run_estimate(const EstimateArgs& a) {
  Settings settings{{"command", "estimate"}, {"method", a.method},           {"p", fmt(a.p)},
                    {"q", fmt(a.q)},         {"score", a.score},             {"ve", a.ve},
                    {"candidate_radius", std::to_string(a.candidate_radius)}, {"prune", a.no_prune ? "0" : "1"}};
  const LoadedGraph lg = load_graph(a.graph, a.seed, settings);
  const srcest::Graph& g = lg.graph;
  const srcest::ObservationSet ve = read_ve(a.ve, lg.labels);
  double q = a.q;
  if (a.explicit_ratio) {
    q = std::clamp(*a.explicit_ratio, 0.01, 0.99);
    settings["explicit_ratio"] = fmt(*a.explicit_ratio);
  }
  const auto params = srcest::SIParams<double>::uniform(a.p, q, g.node_count());
  params.check(g.node_count());

  const srcest::Method method = srcest::parse_method(a.method);
  srcest::EstimateOptions options;
  options.general.candidate_radius = a.candidate_radius;
  options.general.prune = !a.no_prune;
  options.general.score = a.score == "exact-path" ? srcest::ScoreMode::exact_path : srcest::ScoreMode::tree_formula;

  srcest::SourceEstimate est;
  std::optional<bool> boundary;
  if (method == srcest::Method::rg || method == srcest::Method::oracle) {
    options.general.method = method == srcest::Method::oracle ? srcest::GeneralMethod::oracle
                                                              : srcest::GeneralMethod::reverse_greedy;
    const srcest::GeneralEstimate ge = srcest::estimate_source_general(g, ve, params, options.general);
    est = ge.estimate;
    boundary = ge.boundary;
  } else {
    est = srcest::estimate_source(g, ve, params, method, options);
  }

  if (a.format == "csv") {
    std::ostringstream os;
    os << "method,estimator,score,pick\n";
    for (srcest::NodeId u : est.estimators) {
      os << est.method << ',' << lg.labels.label(u) << ',' << fmt(est.score) << ',' << (u == est.pick() ? 1 : 0) << '\n';
    }
    write_text(a.out, os.str());
    return 0;
  }
  json doc = {{"meta", meta_block(a.seed, settings)},
              {"method", est.method},
              {"estimators", label_list(lg.labels, est.estimators)},
              {"pick", lg.labels.label(est.pick())},
              {"score", std::isfinite(est.score) ? json(est.score) : json(nullptr)},
              {"explicit", label_list(lg.labels, ve.nodes())},
              {"labels", lg.labels.labels()}};
  if (boundary) doc["boundary"] = *boundary;
  write_text(a.out, dump(doc));
  return 0;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  std::string config;
  std::string out = "bench";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> threads;
};

int run_bench(const BenchArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw srcest::ConfigError("cannot open config '" + a.config + "'");
  srcest::ExperimentConfig cfg = srcest::parse_config(in);
  if (a.seed) cfg.seed = *a.seed;
  if (a.runs) cfg.runs = *a.runs;
  if (a.threads) cfg.threads = *a.threads;

  std::optional<srcest::EdgeListResult> loaded;
  if (cfg.network == srcest::NetworkKind::edge_list && !cfg.graph_file.empty()) {
    fs::path file = cfg.graph_file;
    if (file.is_relative() && !fs::exists(file)) file = fs::path(a.config).parent_path() / file;
    std::ifstream gin(file);
    if (!gin) throw srcest::ConfigError("cannot open graph file '" + cfg.graph_file + "'");
    loaded = srcest::read_edge_list(gin);
  }
  const srcest::ExperimentResult res = srcest::run_experiment(cfg, loaded ? &loaded->graph : nullptr);

  std::ostringstream csv;
  srcest::write_csv(csv, res, loaded ? &loaded->labels : nullptr);
  write_text(a.out + ".csv", csv.str());
  const std::string summary = dump(srcest::summary_json(res));
  write_text(a.out + ".summary.json", summary);
  std::cout << summary;
  return 0;
}

// ---- export-miqcqp ----------------------------------------------------------

struct ExportArgs {
  GraphFlags graph;
  std::string ve;
  std::string center;
  std::uint64_t seed = 42;
  std::string out;
};

int run_export(const ExportArgs& a) {
  Settings settings{{"command", "export-miqcqp"}, {"ve", a.ve}, {"center", a.center}};
  const LoadedGraph lg = load_graph(a.graph, a.seed, settings);
  const srcest::ObservationSet ve = read_ve(a.ve, lg.labels);
  const srcest::CandidateSubgraph c = srcest::build_candidate_subgraph(lg.graph, lookup(lg.labels, a.center), ve);
  json doc = srcest::export_miqcqp(c);
  doc["meta"] = meta_block(a.seed, settings);
  doc["labels"] = label_list(lg.labels, c.h.to_global);
  write_text(a.out, dump(doc));
  return 0;
}

// ---- oracle-check -----------------------------------------------------------

struct OracleArgs {
  srcest::OracleSuiteOptions suite;
  std::string out;
};

int run_oracle_check(const OracleArgs& a) {
  const srcest::OracleSuiteReport report = srcest::run_oracle_suite(a.suite);
  json props = json::array();
  for (const auto& p : report.properties) {
    std::cout << srcest::status_name(p.status) << ' ' << p.name << " checks=" << p.checks
              << " violations=" << p.violations << '\n';
    if (!p.note.empty()) std::cout << "  note: " << p.note << '\n';
    if (!p.counterexample.empty()) std::cout << "  counterexample: " << p.counterexample << '\n';
    props.push_back({{"name", p.name},
                     {"status", srcest::status_name(p.status)},
                     {"checks", p.checks},
                     {"violations", p.violations},
                     {"counterexample", p.counterexample},
                     {"note", p.note}});
  }
  std::cout << (report.informational ? "run marked informational" : (report.ok() ? "all properties pass" : "failures"))
            << " (" << report.instances << " instances)\n";
  if (!a.out.empty()) {
    Settings settings{{"command", "oracle-check"},
                      {"trees", std::to_string(a.suite.trees)},
                      {"nodes", std::to_string(a.suite.max_nodes)},
                      {"min_nodes", std::to_string(a.suite.min_nodes)},
                      {"samples", std::to_string(a.suite.samples_per_tree)},
                      {"q_below_band", a.suite.q_below_band ? "1" : "0"},
                      {"enumerate", a.suite.enumerate_paths ? "1" : "0"}};
    json doc = {{"meta", meta_block(a.suite.seed, settings)},
                {"informational", report.informational},
                {"instances", report.instances},
                {"properties", std::move(props)}};
    write_text(a.out, dump(doc));
  }
  return report.ok() ? 0 : 1;
}

void add_graph_flags(CLI::App* cmd, GraphFlags& flags) {
  cmd->add_option("--graph", flags.file, "Edge list file (two labels per line, '#' comments)");
  cmd->add_option("--generator", flags.generator,
                  "Synthetic graph, e.g. small-world:n=2000,k=4,beta=0.1 or random2-tree:budget=5000");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infection source estimation under the discrete-time SI model"};
  app.set_version_flag("--version", std::string(srcest::kToolVersion));
  app.require_subcommand(1);

  const std::vector<std::string> methods{"jce", "rg", "oracle", "dc", "cc", "bc"};
  const std::vector<std::string> formats{"json", "csv"};
  const std::vector<std::string> scores{"tree-formula", "exact-path"};

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one SI spread and print the infection path");
  add_graph_flags(simulate, sim.graph);
  simulate->add_option("--source", sim.source, "Source label (default: uniform random)");
  simulate->add_option("--p", sim.p, "Infection probability");
  simulate->add_option("--q", sim.q, "Explicitness probability for every node");
  simulate->add_option("--explicit-ratio", sim.explicit_ratio, "Mark this fraction of infected nodes explicit instead");
  auto* horizon = simulate->add_option("--horizon", sim.horizon, "Stop after this many slots");
  simulate->add_option("--threshold", sim.threshold, "Stop once more than this many nodes are infected")
      ->excludes(horizon);
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--out", sim.out, "Output file (default stdout)");
  simulate->add_option("--ve-out", sim.ve_out, "Also write the explicit labels, one per line");
  simulate->add_option("--format", sim.format)->check(CLI::IsMember(formats));

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the source from an explicit-node set");
  add_graph_flags(estimate, est.graph);
  estimate->add_option("--ve", est.ve, "File with explicit node labels, one per line")->required();
  estimate->add_option("--method", est.method)->check(CLI::IsMember(methods));
  estimate->add_option("--p", est.p, "Infection probability");
  estimate->add_option("--q", est.q, "Explicitness probability for every node");
  estimate->add_option("--explicit-ratio", est.explicit_ratio, "Use q = ratio (clamped to [0.01, 0.99])");
  estimate->add_option("--candidate-radius", est.candidate_radius,
                       "rg/oracle: only score nodes within this radius of the Jordan center");
  estimate->add_option("--score", est.score, "rg/oracle tree scoring")->check(CLI::IsMember(scores));
  estimate->add_flag("--no-prune", est.no_prune, "rg/oracle: keep non-explicit leaves when scoring");
  estimate->add_option("--seed", est.seed, "Seed for --generator");
  estimate->add_option("--out", est.out, "Output file (default stdout)");
  estimate->add_option("--format", est.format)->check(CLI::IsMember(formats));

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark described by a key=value config file");
  bench_cmd->add_option("--config", bench.config)->required();
  bench_cmd->add_option("--out", bench.out, "Output prefix for .csv and .summary.json");
  bench_cmd->add_option("--seed", bench.seed, "Override the config seed");
  bench_cmd->add_option("--runs", bench.runs, "Override the run count");
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (0 = all cores)");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export-miqcqp", "Write the spanning-tree program of H_v as JSON");
  add_graph_flags(export_cmd, exp.graph);
  export_cmd->add_option("--ve", exp.ve)->required();
  export_cmd->add_option("--center", exp.center, "Candidate source label")->required();
  export_cmd->add_option("--seed", exp.seed, "Seed for --generator");
  export_cmd->add_option("--out", exp.out, "Output file (default stdout)");

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Check the tree results against exhaustive enumeration");
  oracle_cmd->add_option("--trees", oracle.suite.trees, "Random trees to draw");
  oracle_cmd->add_option("--nodes,--max-nodes", oracle.suite.max_nodes, "Largest tree size (guard: 8)");
  oracle_cmd->add_option("--min-nodes", oracle.suite.min_nodes);
  oracle_cmd->add_option("--samples", oracle.suite.samples_per_tree, "(p, q) draws per tree");
  oracle_cmd->add_option("--seed", oracle.suite.seed);
  oracle_cmd->add_flag("--q-below-band", oracle.suite.q_below_band,
                       "Draw q below max(0, 2 - 1/p); path properties become informational");
  bool skip_enumeration = false;
  oracle_cmd->add_flag("--skip-enumeration", skip_enumeration, "Skip the per-(v,t) path enumeration checks");
  oracle_cmd->add_option("--out", oracle.out, "Also write a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*estimate) return run_estimate(est);
    if (*bench_cmd) return run_bench(bench);
    if (*export_cmd) return run_export(exp);
    if (*oracle_cmd) {
      oracle.suite.enumerate_paths = !skip_enumeration;
      return run_oracle_check(oracle);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const srcest::ScaleRefusal& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return 4;
  } catch (const srcest::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
