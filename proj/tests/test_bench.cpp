#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "srcest/srcest.hpp"

using namespace srcest;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.network = NetworkKind::random2_tree;
  cfg.tree_budget = 800;
  cfg.runs = 12;
  cfg.threshold = 40;
  cfg.seed = 5;
  cfg.threads = 1;
  return cfg;
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

}  // namespace

TEST(Generators, RegularTreeDegrees) {
  const Graph g = regular_tree(4, 200);
  EXPECT_TRUE(is_tree(g));
  EXPECT_GE(g.node_count(), 200u);
  EXPECT_LE(g.node_count(), 203u);
  for (NodeId u = 0; static_cast<std::size_t>(u) < g.node_count(); ++u) {
    EXPECT_TRUE(g.degree(u) == 4 || g.degree(u) == 1) << u;
  }
  EXPECT_THROW(regular_tree(1, 10), ArgumentError);
}

TEST(Generators, RandomTreeDegreeSets) {
  Rng rng = make_stream(91, 0);
  const Graph one = gen_random_tree(rng, RandomTreeMode::random1, 3000);
  const Graph two = gen_random_tree(rng, RandomTreeMode::random2, 3000);
  std::set<std::size_t> d1, d2;
  for (NodeId u = 0; static_cast<std::size_t>(u) < one.node_count(); ++u) d1.insert(one.degree(u));
  for (NodeId u = 0; static_cast<std::size_t>(u) < two.node_count(); ++u) d2.insert(two.degree(u));
  EXPECT_EQ(d1, (std::set<std::size_t>{1, 3, 4, 5, 6}));
  EXPECT_EQ(d2, (std::set<std::size_t>{1, 3, 6}));
  EXPECT_TRUE(is_tree(one));
  EXPECT_TRUE(is_tree(two));
}

TEST(Generators, PermutationRelabels) {
  Rng rng = make_stream(92, 0);
  const auto perm = random_permutation(rng, 50);
  std::set<NodeId> seen(perm.begin(), perm.end());
  EXPECT_EQ(seen.size(), 50u);
  const Graph g = regular_tree(3, 50);
  const Graph h = permute_nodes(g, perm);
  EXPECT_EQ(h.edge_count(), g.edge_count());
  for (auto [a, b] : g.edges()) EXPECT_TRUE(h.has_edge(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]));
}

TEST(Generators, LabelledTreesAreTrees) {
  Rng rng = make_stream(93, 0);
  for (std::size_t n = 1; n < 40; ++n) EXPECT_TRUE(is_tree(random_labelled_tree(rng, n)));
}

TEST(Generators, SmallWorldShape) {
  Rng rng = make_stream(94, 0);
  const SmallWorld sw = gen_small_world(rng, 2000, 4, 0.1);
  EXPECT_TRUE(is_connected(sw.graph));
  EXPECT_EQ(sw.graph.edge_count(), 4000u);
  double total = 0;
  std::size_t pairs = 0;
  for (NodeId s = 0; s < 2000; s += 40) {
    const DistanceMap d = bfs_distances(sw.graph, s);
    for (int x : d.dist) total += x;
    pairs += 1999;
  }
  const double mean = total / static_cast<double>(pairs);
  EXPECT_GE(mean, 4.0);
  EXPECT_LE(mean, 25.0);
  EXPECT_THROW(gen_small_world(rng, 100, 3, 0.1), ArgumentError);
}

TEST(Config, ParsesEveryKey) {
  std::istringstream in(
      "# comment\nnetwork = small-world\nsw_n = 900\nsw_k = 6\nsw_beta = 0.2\nruns = 7\nthreshold = 30\n"
      "p_low = 0.1\np_high = 0.9\nq_policy = explicit-ratio\nexplicit_ratio = 0.5\nmethods = rg, dc\n"
      "seed = 99\ncandidate_radius = 3\nscore = exact-path\nthreads = 2\ntree_budget = 100  # trailing\n");
  const ExperimentConfig cfg = parse_config(in);
  EXPECT_EQ(cfg.network, NetworkKind::small_world);
  EXPECT_EQ(cfg.sw_n, 900u);
  EXPECT_EQ(cfg.sw_k, 6);
  EXPECT_EQ(cfg.runs, 7u);
  EXPECT_EQ(cfg.q_policy, QPolicy::explicit_ratio);
  EXPECT_EQ(cfg.methods, (std::vector<Method>{Method::rg, Method::dc}));
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.candidate_radius, 3);
  EXPECT_EQ(cfg.score, ScoreMode::exact_path);
  EXPECT_EQ(cfg.threads, 2u);
  EXPECT_EQ(cfg.tree_budget, 100u);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ErrorsCarryLineNumbers) {
  const char* bad[] = {"runs = 3\nruns = many\n", "runs = 3\n\nnonsense\n", "network = lattice\n", "seed = -1\n",
                       "methods = jce, pagerank\n", "colour = red\n"};
  const int lines[] = {2, 3, 1, 1, 1, 1};
  for (int i = 0; i < 6; ++i) {
    std::istringstream in(bad[i]);
    try {
      parse_config(in);
      FAIL() << bad[i];
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("config line " + std::to_string(lines[i])), std::string::npos) << e.what();
    }
  }
}

TEST(Config, ValidationRejectsInconsistentSettings) {
  ExperimentConfig cfg = small_config();
  cfg.network = NetworkKind::small_world;
  EXPECT_THROW(cfg.validate(), ConfigError);  // jce on a graph with cycles
  cfg = small_config();
  cfg.threshold = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.q_policy = QPolicy::explicit_ratio;
  cfg.explicit_ratio = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.tree_budget = 40;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, HashTracksSettingsButNotThreads) {
  ExperimentConfig a = small_config();
  ExperimentConfig b = a;
  b.threads = 8;
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.seed = 6;
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Experiment, SameSeedSameCsvAcrossThreadCounts) {
  ExperimentConfig cfg = small_config();
  const std::string one = csv_of(run_experiment(cfg));
  cfg.threads = 3;
  const std::string three = csv_of(run_experiment(cfg));
  EXPECT_EQ(one, three);
  cfg.seed = 6;
  EXPECT_NE(one, csv_of(run_experiment(cfg)));
  EXPECT_EQ(one.substr(0, one.find('\n')), kCsvHeader);
}

TEST(Experiment, RecordInvariants) {
  ExperimentConfig cfg = small_config();
  cfg.runs = 30;
  const ExperimentResult res = run_experiment(cfg);
  ASSERT_EQ(res.records.size(), 30u);
  for (const auto& r : res.records) {
    EXPECT_GT(r.n_infected, static_cast<std::size_t>(cfg.threshold));
    // One slot can at most add every susceptible neighbor; random-2 degrees are at most 6.
    EXPECT_LE(r.n_infected, static_cast<std::size_t>(cfg.threshold) * 6);
    EXPECT_GE(r.n_explicit, 1u);
    EXPECT_LE(r.n_explicit, r.n_infected);
    EXPECT_GT(r.p, 0.0);
    EXPECT_LT(r.p, 1.0);
    ASSERT_EQ(r.outcomes.size(), cfg.methods.size());
    for (const auto& o : r.outcomes) {
      EXPECT_GE(o.error_distance, 0);
      EXPECT_EQ(o.error_distance == 0, o.estimate == r.true_source);
      EXPECT_LE(o.tie_error_distance, o.error_distance);
    }
  }
  const auto& jce = res.summary.at("jce");
  EXPECT_EQ(jce.count, 30u);
  EXPECT_GE(jce.ci95, 0.0);
}

TEST(Experiment, ExplicitRatioSetsTheObservationSize) {
  ExperimentConfig cfg = small_config();
  cfg.q_policy = QPolicy::explicit_ratio;
  cfg.explicit_ratio = 0.25;
  const ExperimentResult res = run_experiment(cfg);
  for (const auto& r : res.records) {
    const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.25 * static_cast<double>(r.n_infected))));
    EXPECT_EQ(r.n_explicit, want);
  }
  std::ostringstream os;
  write_csv(os, res);
  EXPECT_NE(os.str().find("explicit-ratio:0.25"), std::string::npos);
}

TEST(Experiment, LoadedGraphAndGeneralMethods) {
  ExperimentConfig cfg;
  cfg.network = NetworkKind::edge_list;
  cfg.graph_file = "inline";
  cfg.runs = 4;
  cfg.threshold = 20;
  cfg.methods = {Method::rg, Method::dc, Method::cc, Method::bc};
  cfg.candidate_radius = 2;
  cfg.threads = 1;
  Rng rng = make_stream(95, 0);
  const Graph g = gen_small_world(rng, 200, 4, 0.1).graph;
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  const ExperimentResult res = run_experiment(cfg, &g);
  EXPECT_EQ(res.records.size(), 4u);
  const nlohmann::json j = summary_json(res);
  EXPECT_EQ(j.at("seed"), cfg.seed);
  EXPECT_EQ(j.at("config_hash"), cfg.hash());
  EXPECT_TRUE(j.at("methods").contains("rg"));
}

TEST(Summary, StatisticsOfKnownErrors) {
  ExperimentConfig cfg;
  cfg.methods = {Method::dc};
  std::vector<RunRecord> records(4);
  const int errors[] = {0, 2, 4, 6};
  for (int i = 0; i < 4; ++i) {
    records[static_cast<std::size_t>(i)].boundary = i == 3;
    MethodOutcome o;
    o.error_distance = errors[i];
    o.tie_error_distance = errors[i] / 2;
    records[static_cast<std::size_t>(i)].outcomes = {o};
  }
  const MethodSummary s = summarize(cfg, records).at("dc");
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(20.0 / 3.0));
  EXPECT_DOUBLE_EQ(s.mean_tie_min, 1.5);
  EXPECT_EQ(s.interior_count, 3u);
  EXPECT_DOUBLE_EQ(s.interior_mean, 2.0);
}
