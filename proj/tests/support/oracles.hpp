#pragma once

// Brute-force reference implementations used only by the tests. They share no
// code with the library beyond the graph container.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cldsim/graph.hpp"

namespace oracle {

// Strings
std::size_t levenshtein(const std::string& a, const std::string& b);
double fuzzy_ratio(const std::string& a, const std::string& b);
double bleu(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

// Statistics
double transitivity(const cldsim::CausalGraph& g);
/// Menger via exhaustive vertex-cut search on the undirected projection.
std::size_t node_connectivity(const cldsim::CausalGraph& g, std::size_t u, std::size_t v);
double average_connectivity(const cldsim::CausalGraph& g);
std::size_t count_cycles(const cldsim::CausalGraph& g);

// Kernels (raw values; normalize with `normalized`)
struct Raw {
  double cross = 0;
  double self_a = 0;
  double self_b = 0;
};
double normalized(const Raw& r);

Raw shortest_path(const cldsim::CausalGraph& a, const cldsim::CausalGraph& b, bool with_polarity);
Raw subgraph_matching(const cldsim::CausalGraph& a, const cldsim::CausalGraph& b, int k, bool with_polarity);
Raw wl_vertex(const cldsim::CausalGraph& a, const cldsim::CausalGraph& b, int h);
Raw wl_edge(const cldsim::CausalGraph& a, const cldsim::CausalGraph& b, int h);

/// Jacobi eigen-decomposition of the undirected adjacency, then the same
/// ordering rule as the library. Sets `degenerate` when a selected eigenvalue
/// is repeated (its eigenvector basis is then not unique).
std::vector<std::vector<double>> spectral_coords(const cldsim::CausalGraph& g, int dims, bool& degenerate);
Raw pyramid_match(const cldsim::CausalGraph& a, const cldsim::CausalGraph& b, int dims, int levels, bool& degenerate);

// Assignment
double best_assignment_total(const std::vector<double>& w, std::size_t rows, std::size_t cols);

// Random inputs
struct GraphSpec {
  std::size_t min_nodes = 1;
  std::size_t max_nodes = 5;
  double edge_probability = 0.35;
  bool at_least_one_edge = false;
  /// Names are drawn from the first `vocabulary` entries of a fixed list, so
  /// small values force name collisions across graphs.
  std::size_t vocabulary = 6;
};
cldsim::CausalGraph random_graph(std::mt19937_64& rng, const GraphSpec& spec = {});
std::string random_word(std::mt19937_64& rng, std::size_t max_len, const std::string& alphabet);

}  // namespace oracle
