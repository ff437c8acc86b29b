#include "cldsim/semantic.hpp"

#include <algorithm>
#include <limits>

#include "cldsim/assignment.hpp"
#include "cldsim/error.hpp"
#include "cldsim/text_metrics.hpp"

namespace cldsim {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::ref_best_match: return "ref_best_match";
    case Strategy::symmetric_best_match: return "symmetric_best_match";
    case Strategy::optimal_assignment_penalized: return "optimal_assignment_penalized";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view id) {
  for (auto s : {Strategy::ref_best_match, Strategy::symmetric_best_match, Strategy::optimal_assignment_penalized}) {
    if (to_string(s) == id) return s;
  }
  return std::nullopt;
}

namespace {

void require_non_empty(const CausalGraph& ref, const CausalGraph& cmp) {
  if (ref.empty()) throw Error(ErrorKind::empty_graph, "reference graph has no variables");
  if (cmp.empty()) throw Error(ErrorKind::empty_graph, "comparison graph has no variables");
}

PairwiseMatrix shell(Metric metric, const CausalGraph& ref, const CausalGraph& cmp) {
  PairwiseMatrix m;
  m.metric = metric;
  m.ref_names = ref.names();
  m.cmp_names = cmp.names();
  m.scores.resize(m.ref_names.size() * m.cmp_names.size());
  return m;
}

double row_best_mean(const PairwiseMatrix& m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, m.at(i, j));
    sum += best;
  }
  return sum / static_cast<double>(m.rows());
}

double col_best_mean(const PairwiseMatrix& m) {
  double sum = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.rows(); ++i) best = std::max(best, m.at(i, j));
    sum += best;
  }
  return sum / static_cast<double>(m.cols());
}

}  // namespace

PairwiseMatrix pairwise_matrix(Metric metric, const CausalGraph& ref, const CausalGraph& cmp,
                               const EmbeddingProvider* provider) {
  if (!is_semantic(metric)) {
    throw Error(ErrorKind::invalid_input, std::string(to_string(metric)) + " is not a name-level metric");
  }
  require_non_empty(ref, cmp);
  if (needs_embeddings(metric)) {
    if (provider == nullptr) {
      throw Error(ErrorKind::missing_provider, std::string(to_string(metric)) + " needs an embedding provider");
    }
    return pairwise_matrix(metric, ref, cmp, provider->embed(ref.names()), provider->embed(cmp.names()));
  }
  if (provider != nullptr) {
    throw Error(ErrorKind::invalid_input, std::string(to_string(metric)) + " does not use embeddings");
  }
  return pairwise_matrix(metric, ref, cmp, {}, {});
}

PairwiseMatrix pairwise_matrix(Metric metric, const CausalGraph& ref, const CausalGraph& cmp,
                               const std::vector<EmbeddingVector>& ref_vectors,
                               const std::vector<EmbeddingVector>& cmp_vectors) {
  require_non_empty(ref, cmp);
  PairwiseMatrix m = shell(metric, ref, cmp);
  const std::size_t rows = m.rows(), cols = m.cols();
  switch (metric) {
    case Metric::m1: {
      std::vector<TokenSequence> ref_tokens, cmp_tokens;
      for (const auto& n : m.ref_names) ref_tokens.push_back(tokenize(n));
      for (const auto& n : m.cmp_names) cmp_tokens.push_back(tokenize(n));
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m.scores[i * cols + j] = bleu(cmp_tokens[j], ref_tokens[i]);
      }
      break;
    }
    case Metric::m2:
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m.scores[i * cols + j] = fuzzy_ratio(m.ref_names[i], m.cmp_names[j]);
      }
      break;
    case Metric::m3:
    case Metric::m4: {
      if (ref_vectors.size() != rows || cmp_vectors.size() != cols) {
        throw Error(ErrorKind::protocol_violation, "embedding count does not match variable count");
      }
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          m.scores[i * cols + j] = metric == Metric::m3 ? cosine(ref_vectors[i], cmp_vectors[j])
                                                        : neg_euclidean(ref_vectors[i], cmp_vectors[j]);
        }
      }
      break;
    }
    default: throw Error(ErrorKind::invalid_input, std::string(to_string(metric)) + " is not a name-level metric");
  }
  return m;
}

double aggregate(const PairwiseMatrix& matrix, Strategy strategy) {
  if (matrix.rows() == 0 || matrix.cols() == 0) throw Error(ErrorKind::empty_input, "empty pairwise matrix");
  switch (strategy) {
    case Strategy::ref_best_match: return row_best_mean(matrix);
    case Strategy::symmetric_best_match: return 0.5 * (row_best_mean(matrix) + col_best_mean(matrix));
    case Strategy::optimal_assignment_penalized: {
      const std::size_t rows = matrix.rows(), cols = matrix.cols();
      const auto match = max_weight_assignment(matrix.scores, rows, cols);
      double floor = 0.0;
      if (matrix.metric == Metric::m4) floor = *std::min_element(matrix.scores.begin(), matrix.scores.end());
      const std::size_t larger = std::max(rows, cols);
      const std::size_t unmatched = larger - std::min(rows, cols);
      return (match.total + static_cast<double>(unmatched) * floor) / static_cast<double>(larger);
    }
  }
  throw Error(ErrorKind::internal, "unknown strategy");
}

SemanticScores semantic_scores(const CausalGraph& ref, const CausalGraph& cmp, const EmbeddingProvider& provider,
                               Strategy strategy) {
  require_non_empty(ref, cmp);
  const auto ref_vectors = provider.embed(ref.names());
  const auto cmp_vectors = provider.embed(cmp.names());
  SemanticScores s;
  s.strategy = strategy;
  s.m1_bleu = aggregate(pairwise_matrix(Metric::m1, ref, cmp, {}, {}), strategy);
  s.m2_fuzzy = aggregate(pairwise_matrix(Metric::m2, ref, cmp, {}, {}), strategy);
  s.m3_cosine = aggregate(pairwise_matrix(Metric::m3, ref, cmp, ref_vectors, cmp_vectors), strategy);
  s.m4_neg_euclid = aggregate(pairwise_matrix(Metric::m4, ref, cmp, ref_vectors, cmp_vectors), strategy);
  return s;
}

}  // namespace cldsim
