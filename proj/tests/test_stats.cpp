#include <gtest/gtest.h>

#include <random>

#include "cldsim/error.hpp"
#include "cldsim/graph_io.hpp"
#include "cldsim/stats.hpp"
#include "support/oracles.hpp"

using namespace cldsim;

namespace {

CausalGraph directed(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges) {
  GraphBuilder b;
  for (std::size_t i = 0; i < n; ++i) b.add_node("n" + std::to_string(i), "v" + std::to_string(i));
  for (auto [s, t] : edges) b.add_edge(s, t, Polarity::positive);
  return std::move(b).build();
}

}  // namespace

TEST(Density, Examples) {
  EXPECT_DOUBLE_EQ(density(directed(4, {{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 0}})), 5.0 / 12.0);
  EXPECT_DOUBLE_EQ(density(directed(3, {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}})), 1.0);
  EXPECT_DOUBLE_EQ(density(directed(5, {})), 0.0);
  EXPECT_DOUBLE_EQ(density(directed(1, {})), 0.0);
  EXPECT_DOUBLE_EQ(density(directed(2, {{0, 1}})), 0.5);
}

TEST(Transitivity, Examples) {
  EXPECT_DOUBLE_EQ(transitivity(directed(3, {{0, 1}, {1, 2}, {2, 0}})), 1.0);
  EXPECT_DOUBLE_EQ(transitivity(directed(3, {{0, 1}, {1, 2}})), 0.0);
  // 4-cycle plus chord 0-2: t = 2, a = 8.
  EXPECT_DOUBLE_EQ(transitivity(directed(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}})), 0.75);
  // Reciprocal edges collapse in the projection.
  EXPECT_DOUBLE_EQ(transitivity(directed(3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 0}})), 1.0);
  EXPECT_DOUBLE_EQ(transitivity(directed(0, {})), 0.0);
}

TEST(Connectivity, Examples) {
  EXPECT_DOUBLE_EQ(average_connectivity(directed(3, {{0, 1}, {1, 2}, {2, 0}})), 2.0);
  EXPECT_DOUBLE_EQ(average_connectivity(directed(2, {})), 0.0);
  EXPECT_EQ(local_node_connectivity(directed(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}), 0, 2), 2u);
  try {
    average_connectivity(directed(1, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined_statistic);
  }
}

TEST(Cycles, Examples) {
  EXPECT_EQ(count_cycles(directed(2, {{0, 1}, {1, 0}})), 1u);
  EXPECT_EQ(count_cycles(directed(5, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}})), 0u);
  // Complete digraph on 4 nodes: 6 + 8 + 6 = 20 simple cycles.
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) all.emplace_back(i, j);
    }
  }
  EXPECT_EQ(count_cycles(directed(4, all)), 20u);
  try {
    count_cycles(directed(4, all), 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::resource_limit);
  }
}

TEST(Stats, EmptyAndSingleEdge) {
  auto s = stats(CausalGraph{});
  EXPECT_EQ(s.nodes, 0u);
  EXPECT_EQ(s.edges, 0u);
  EXPECT_EQ(s.cycles, 0u);
  EXPECT_EQ(s.density, 0.0);
  EXPECT_FALSE(s.avg_connectivity);
  auto e = stats(directed(2, {{0, 1}}));
  EXPECT_EQ(e.nodes, 2u);
  EXPECT_EQ(e.edges, 1u);
  EXPECT_DOUBLE_EQ(e.density, 0.5);
}

TEST(Stats, ReferenceFixture) {
  auto s = stats(load_graph(std::string(CLDSIM_DATA_DIR) + "/reference_ltg.json"));
  EXPECT_EQ(s.nodes, 4u);
  EXPECT_EQ(s.edges, 5u);
  EXPECT_EQ(s.cycles, 2u);
  EXPECT_EQ(*s.avg_connectivity, 1.0);
  EXPECT_DOUBLE_EQ(s.density, 5.0 / 12.0);
}

TEST(Stats, MatchOracles) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    auto g = oracle::random_graph(rng, {.min_nodes = 2, .max_nodes = 8, .edge_probability = 0.3});
    auto s = stats(g);
    EXPECT_EQ(s.cycles, oracle::count_cycles(g));
    EXPECT_NEAR(s.transitivity, oracle::transitivity(g), 1e-12);
    EXPECT_NEAR(*s.avg_connectivity, oracle::average_connectivity(g), 1e-12);
    EXPECT_GE(s.density, 0.0);
    EXPECT_LE(s.density, 1.0);
    EXPECT_LE(*s.avg_connectivity, static_cast<double>(s.nodes - 1));
  }
}
