#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cldsim/embeddings.hpp"
#include "cldsim/graph.hpp"
#include "cldsim/metrics.hpp"

namespace cldsim {

enum class Strategy { ref_best_match, symmetric_best_match, optimal_assignment_penalized };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view id);

/// Scores of one name-level metric between every reference name (rows) and
/// every comparison name (columns), row-major.
struct PairwiseMatrix {
  Metric metric = Metric::m2;
  std::vector<std::string> ref_names;
  std::vector<std::string> cmp_names;
  std::vector<double> scores;

  std::size_t rows() const { return ref_names.size(); }
  std::size_t cols() const { return cmp_names.size(); }
  double at(std::size_t i, std::size_t j) const { return scores[i * cols() + j]; }
};

struct SemanticScores {
  double m1_bleu = 0.0;
  double m2_fuzzy = 0.0;
  double m3_cosine = 0.0;
  double m4_neg_euclid = 0.0;
  Strategy strategy = Strategy::ref_best_match;
};

/// Entry (i, j) = metric(ref name i, cmp name j). For m1 the comparison name
/// is the BLEU candidate. m3/m4 require `provider`; m1/m2 reject one.
/// Throws ErrorKind::empty_graph, ErrorKind::missing_provider,
/// ErrorKind::invalid_input, or whatever the provider throws.
PairwiseMatrix pairwise_matrix(Metric metric, const CausalGraph& ref, const CausalGraph& cmp,
                               const EmbeddingProvider* provider = nullptr);

/// Same as above with vectors already fetched (one per node, in node order).
PairwiseMatrix pairwise_matrix(Metric metric, const CausalGraph& ref, const CausalGraph& cmp,
                               const std::vector<EmbeddingVector>& ref_vectors,
                               const std::vector<EmbeddingVector>& cmp_vectors);

/// Lifts a pairwise matrix to one graph-level score.
///   ref_best_match: mean over rows of the row maximum.
///   symmetric_best_match: mean of the row-wise and column-wise versions.
///   optimal_assignment_penalized: max-weight one-to-one assignment total,
///     unmatched rows/columns contributing the metric floor (0 for m1-m3, the
///     matrix minimum for m4), divided by max(rows, cols).
double aggregate(const PairwiseMatrix& matrix, Strategy strategy);

/// m1-m4 with one embedding call per graph.
SemanticScores semantic_scores(const CausalGraph& ref, const CausalGraph& cmp, const EmbeddingProvider& provider,
                               Strategy strategy = Strategy::ref_best_match);

}  // namespace cldsim
