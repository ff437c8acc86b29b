#include <gtest/gtest.h>

#include <random>

#include "cldsim/assignment.hpp"
#include "cldsim/error.hpp"
#include "cldsim/graph_io.hpp"
#include "cldsim/pipeline.hpp"
#include "cldsim/semantic.hpp"
#include "support/oracles.hpp"

using namespace cldsim;

namespace {

CausalGraph named(std::vector<std::string> names) {
  GraphBuilder b;
  for (std::size_t i = 0; i < names.size(); ++i) b.add_node("n" + std::to_string(i), names[i]);
  return std::move(b).build();
}

PairwiseMatrix matrix(std::size_t rows, std::size_t cols, std::vector<double> scores, Metric m = Metric::m2) {
  PairwiseMatrix pm;
  pm.metric = m;
  for (std::size_t i = 0; i < rows; ++i) pm.ref_names.push_back("r" + std::to_string(i));
  for (std::size_t j = 0; j < cols; ++j) pm.cmp_names.push_back("c" + std::to_string(j));
  pm.scores = std::move(scores);
  return pm;
}

CausalGraph reference() { return load_graph(std::string(CLDSIM_DATA_DIR) + "/reference_ltg.json"); }

}  // namespace

TEST(PairwiseMatrix, Examples) {
  auto one = pairwise_matrix(Metric::m2, named({"a"}), named({"a"}));
  EXPECT_EQ(one.scores, (std::vector<double>{1.0}));
  auto two = pairwise_matrix(Metric::m2, named({"population", "net increase"}), named({"population"}));
  ASSERT_EQ(two.rows(), 2u);
  ASSERT_EQ(two.cols(), 1u);
  EXPECT_EQ(two.at(0, 0), 1.0);
  EXPECT_NEAR(two.at(1, 0), oracle::fuzzy_ratio("net increase", "population"), 1e-12);

  try {
    pairwise_matrix(Metric::m3, named({"a"}), named({"a"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::missing_provider);
  }
  auto det = deterministic_provider(1, 8);
  try {
    pairwise_matrix(Metric::m2, named({"a"}), named({"a"}), det.get());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_input);
  }
  try {
    pairwise_matrix(Metric::m2, named({"a"}), CausalGraph{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_graph);
  }
}

TEST(PairwiseMatrix, BleuDirection) {
  // The comparison name is the candidate: a short candidate pays the brevity penalty.
  auto m = pairwise_matrix(Metric::m1, named({"population growth"}), named({"population"}));
  EXPECT_NEAR(m.at(0, 0), oracle::bleu({"population"}, {"population", "growth"}), 1e-12);
}

TEST(Aggregate, Examples) {
  for (Strategy s : {Strategy::ref_best_match, Strategy::symmetric_best_match, Strategy::optimal_assignment_penalized}) {
    EXPECT_EQ(aggregate(matrix(3, 3, std::vector<double>(9, 1.0)), s), 1.0);
  }
  EXPECT_DOUBLE_EQ(aggregate(matrix(2, 1, {1, 0.5}), Strategy::ref_best_match), 0.75);
  EXPECT_DOUBLE_EQ(aggregate(matrix(2, 2, {1, 0, 0, 1}), Strategy::optimal_assignment_penalized), 1.0);
  EXPECT_DOUBLE_EQ(oracle::best_assignment_total({1, 0, 0, 1}, 2, 2), 2.0);
  // Column-wise: max over rows of column 0 is 1; row-wise mean 0.75.
  EXPECT_DOUBLE_EQ(aggregate(matrix(2, 1, {1, 0.5}), Strategy::symmetric_best_match), (0.75 + 1.0) / 2);
  // One matched row (1) plus one unmatched row at the floor 0, over 2.
  EXPECT_DOUBLE_EQ(aggregate(matrix(2, 1, {1, 0.5}), Strategy::optimal_assignment_penalized), 0.5);
  // m4 unmatched rows use the matrix minimum.
  EXPECT_DOUBLE_EQ(aggregate(matrix(2, 1, {-0.2, -0.6}, Metric::m4), Strategy::optimal_assignment_penalized),
                   (-0.2 + -0.6) / 2);
  try {
    aggregate(matrix(0, 0, {}), Strategy::ref_best_match);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_input);
  }
}

TEST(Assignment, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int t = 0; t < 300; ++t) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    std::vector<double> w(rows * cols);
    for (double& x : w) x = u(rng);
    auto a = max_weight_assignment(w, rows, cols);
    EXPECT_NEAR(a.total, oracle::best_assignment_total(w, rows, cols), 1e-12);
    std::vector<int> used(cols, 0);
    std::size_t matched = 0;
    double total = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (!a.row_to_col[i]) continue;
      ++matched;
      EXPECT_FALSE(used[*a.row_to_col[i]]++);
      total += w[i * cols + *a.row_to_col[i]];
    }
    EXPECT_EQ(matched, std::min(rows, cols));
    EXPECT_NEAR(total, a.total, 1e-12);
  }
}

TEST(SemanticScores, IdentityGibberishAndMissing) {
  auto det = deterministic_provider(7, 32);
  auto g = reference();
  for (Strategy s : {Strategy::ref_best_match, Strategy::symmetric_best_match, Strategy::optimal_assignment_penalized}) {
    auto id = semantic_scores(g, g, *det, s);
    EXPECT_EQ(id.m1_bleu, 1.0);
    EXPECT_EQ(id.m2_fuzzy, 1.0);
    EXPECT_EQ(id.m3_cosine, 1.0);
    EXPECT_EQ(id.m4_neg_euclid, 0.0);
  }
  auto gib = semantic_scores(g, rename_all(g, 4), *det);
  EXPECT_EQ(gib.m1_bleu, 0.0);
  EXPECT_LT(gib.m2_fuzzy, 0.5);

  auto missing = semantic_scores(g, load_graph(std::string(CLDSIM_DATA_DIR) + "/ltg_moderate.json"), *det);
  EXPECT_LT(missing.m2_fuzzy, 1.0);
  EXPECT_GT(missing.m2_fuzzy, gib.m2_fuzzy);
  EXPECT_LT(missing.m3_cosine, 1.0);
  EXPECT_GT(missing.m3_cosine, gib.m3_cosine);
}

TEST(SemanticScores, Properties) {
  auto det = deterministic_provider(2, 16);
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    auto a = oracle::random_graph(rng, {.max_nodes = 5, .vocabulary = 12});
    auto b = oracle::random_graph(rng, {.max_nodes = 5, .vocabulary = 12});
    auto extra = oracle::random_graph(rng, {.max_nodes = 3, .vocabulary = 18});
    // b plus extra variables.
    GraphBuilder bb;
    for (const auto& n : b.nodes()) bb.add_node(n.id, n.name);
    for (const auto& n : extra.nodes()) bb.add_node("x" + n.id, n.name);
    auto bigger = std::move(bb).build();

    for (Metric m : {Metric::m1, Metric::m2, Metric::m3, Metric::m4}) {
      const auto* p = needs_embeddings(m) ? det.get() : nullptr;
      auto pm = pairwise_matrix(m, a, b, p);
      const double lo = *std::min_element(pm.scores.begin(), pm.scores.end());
      const double hi = *std::max_element(pm.scores.begin(), pm.scores.end());
      for (Strategy s : {Strategy::ref_best_match, Strategy::symmetric_best_match}) {
        const double v = aggregate(pm, s);
        EXPECT_GE(v, lo - 1e-12);
        EXPECT_LE(v, hi + 1e-12);
      }
      EXPECT_GE(aggregate(pairwise_matrix(m, a, bigger, p), Strategy::ref_best_match),
                aggregate(pm, Strategy::ref_best_match) - 1e-12);
      if (m != Metric::m1) {
        EXPECT_NEAR(aggregate(pm, Strategy::symmetric_best_match),
                    aggregate(pairwise_matrix(m, b, a, p), Strategy::symmetric_best_match), 1e-12);
      }
    }
  }
}
