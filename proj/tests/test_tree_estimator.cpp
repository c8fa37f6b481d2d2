#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "srcest/srcest.hpp"

using namespace srcest;
using fixtures::v;

TEST(Jce, ExampleTreePicksV1) {
  const JceOutcome out = jce_on_tree(fixtures::example_tree(), ObservationSet{v(2), v(3)});
  EXPECT_EQ(out.estimate.estimators, (std::vector<NodeId>{v(1)}));
  EXPECT_EQ(out.estimate.score, 1.0);
  EXPECT_EQ(out.estimate.method, "jce");
}

TEST(Jce, TinyObservationSets) {
  const Graph g = fixtures::example_tree();
  EXPECT_EQ(jce_on_tree(g, ObservationSet{v(7)}).estimate.estimators, (std::vector<NodeId>{v(7)}));
  const auto two = jce_on_tree(g, ObservationSet{v(3), v(7)}).estimate;
  EXPECT_EQ(two.estimators, (std::vector<NodeId>{v(3), v(7)}));
  EXPECT_EQ(two.score, 1.0);
}

TEST(Jce, PathGraphCenters) {
  // Odd path: one center. Even path: the lower of the two middle nodes.
  EXPECT_EQ(jce_on_tree(fixtures::path_graph(7), ObservationSet{0, 6}).estimate.pick(), 3);
  const auto even = jce_on_tree(fixtures::path_graph(6), ObservationSet{0, 5}).estimate;
  EXPECT_TRUE(even.pick() == 2 || even.pick() == 3);
  EXPECT_EQ(even.score, 3.0);
}

TEST(Jce, RejectsGraphsWithCycles) {
  try {
    jce_on_tree(fixtures::cycle_graph(5), ObservationSet{0, 2});
    FAIL() << "expected a StructureError";
  } catch (const StructureError& e) {
    EXPECT_NE(std::string(e.what()).find("tree method on general graph"), std::string::npos);
  }
}

TEST(Jce, RejectsNonMinimalH) {
  const Graph g = fixtures::example_tree();
  const ObservationSet ve{v(2), v(3)};
  const Subgraph h = minimal_spanning_subtree(g, ObservationSet{v(2), v(3), v(4)});
  EXPECT_THROW(jce(h, ve), ArgumentError);
  EXPECT_THROW(jce(minimal_spanning_subtree(g, ve), ObservationSet{v(5)}), ArgumentError);
}

TEST(Jce, AgreesWithExhaustiveJordanCenters) {
  Rng rng = make_stream(41, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 60));
    const Graph g = random_labelled_tree(rng, n);
    const ObservationSet ve = fixtures::random_subset(rng, n, trial % 2 == 0 ? 0.1 : 0.5);
    const JceOutcome out = jce_on_tree(g, ve);
    const SourceEstimate centers = jordan_centers_exhaustive(g, ve);
    ASSERT_TRUE(centers.contains(out.estimate.pick()));
    ASSERT_EQ(out.estimate.score, centers.score);
    const std::size_t h = minimal_spanning_subtree(g, ve).size();
    ASSERT_LE(out.upward_messages + out.downward_messages, 2 * h);
  }
}

TEST(Jce, RelabellingKeepsTheCenter) {
  Rng rng = make_stream(42, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 3, 40));
    const Graph g = random_labelled_tree(rng, n);
    const ObservationSet ve = fixtures::random_subset(rng, n, 0.3);
    const auto perm = random_permutation(rng, n);
    std::vector<NodeId> mapped;
    for (NodeId u : ve) mapped.push_back(perm[static_cast<std::size_t>(u)]);
    const ObservationSet ve2(std::move(mapped));
    const Graph g2 = permute_nodes(g, perm);
    const auto a = jordan_centers_exhaustive(g, ve);
    const auto b = jce_on_tree(g2, ve2).estimate;
    std::vector<NodeId> moved;
    for (NodeId u : a.estimators) moved.push_back(perm[static_cast<std::size_t>(u)]);
    std::sort(moved.begin(), moved.end());
    ASSERT_TRUE(std::binary_search(moved.begin(), moved.end(), b.pick()));
    ASSERT_EQ(a.score, b.score);
  }
}

TEST(JordanCenters, TiesAreAdjacent) {
  const auto c = jordan_centers_exhaustive(fixtures::path_graph(4), ObservationSet{0, 3});
  EXPECT_EQ(c.estimators, (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(c.score, 2.0);
}

TEST(JordanCenters, ComponentsMustAgree) {
  const std::vector<Edge> edges{{0, 1}, {2, 3}};
  EXPECT_THROW(jordan_centers_exhaustive(Graph::from_edges(4, edges), ObservationSet{0, 3}), UnreachableError);
}

TEST(MlOracle, ExampleTreeSourceIsV1AtOneSlot) {
  OracleLimits limits;
  limits.max_nodes = 10;
  limits.max_horizon = 2;
  const auto params = SIParams<double>::uniform(0.5, 0.5, 10);
  const MlPathSearch ml = brute_force_ml_path_source(fixtures::example_tree(), ObservationSet{v(2), v(3)}, params,
                                                     2, limits);
  EXPECT_EQ(ml.estimate.estimators, (std::vector<NodeId>{v(1)}));
  EXPECT_EQ(ml.best_horizon[static_cast<std::size_t>(v(1))], 1);
  EXPECT_NEAR(ml.estimate.score, -6 * std::log(2.0), 1e-12);
}

TEST(MlOracle, NoConsistentPathWithinHorizon) {
  const auto params = SIParams<double>::uniform(0.5, 0.5, 5);
  EXPECT_THROW(brute_force_ml_path_source(fixtures::path_graph(5), ObservationSet{0, 4}, params, 1), ArgumentError);
}

TEST(EstimateJson, RoundTrip) {
  const SourceEstimate e{"jce", {3, 4}, 2.0};
  const nlohmann::json j = e;
  const auto back = j.get<SourceEstimate>();
  EXPECT_EQ(back.method, "jce");
  EXPECT_EQ(back.estimators, e.estimators);
  EXPECT_EQ(back.score, 2.0);
}

TEST(OracleSuite, SmallRunPasses) {
  OracleSuiteOptions options;
  options.trees = 40;
  options.max_nodes = 6;
  const OracleSuiteReport report = run_oracle_suite(options);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.instances, 80u);
  for (const auto& p : report.properties) {
    EXPECT_EQ(p.status, PropertyStatus::pass) << p.name << ": " << p.counterexample;
    EXPECT_GT(p.checks, 0u) << p.name;
  }
}

TEST(OracleSuite, RefusesLargeInstances) {
  OracleSuiteOptions options;
  options.max_nodes = 9;
  EXPECT_THROW(run_oracle_suite(options), ScaleRefusal);
}

TEST(OracleSuite, BelowBandIsInformational) {
  OracleSuiteOptions options;
  options.trees = 20;
  options.max_nodes = 6;
  options.q_below_band = true;
  const OracleSuiteReport report = run_oracle_suite(options);
  EXPECT_TRUE(report.ok());
  EXPECT_TRUE(report.informational);
  EXPECT_EQ(report.find("latest-path-optimality")->status, PropertyStatus::info);
  EXPECT_EQ(report.find("jce-in-jordan-set")->status, PropertyStatus::pass);
}

TEST(OracleSuite, SameSeedSameReport) {
  OracleSuiteOptions options;
  options.trees = 10;
  options.max_nodes = 5;
  options.enumerate_paths = false;
  const auto a = run_oracle_suite(options);
  const auto b = run_oracle_suite(options);
  ASSERT_EQ(a.properties.size(), b.properties.size());
  for (std::size_t i = 0; i < a.properties.size(); ++i) EXPECT_EQ(a.properties[i].checks, b.properties[i].checks);
}
