#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cldsim/graph.hpp"
#include "cldsim/metrics.hpp"

namespace cldsim {

struct KernelConfig {
  /// WL refinement rounds (g4, g5).
  int wl_iterations = 3;
  /// Spectral embedding dimensions (g1).
  int pyramid_dims = 6;
  /// Histogram pyramid levels (g1); level l splits each axis into 2^l cells.
  int pyramid_levels = 4;
  /// Largest product-graph clique counted (g3); at most 4.
  int subgraph_max_size = 3;
  /// Weight of a clique of size s is subgraph_weights[s-1]; missing entries
  /// default to 1.
  std::vector<double> subgraph_weights;
  /// Require matching polarity in g2 (first edge of the canonical shortest
  /// path) and g3 (product-graph adjacency).
  bool use_polarity_in_g2_g3 = false;
  /// Upper bound on g3 product-graph vertices.
  std::size_t product_graph_cap = 10'000;

  double subgraph_weight(std::size_t size) const;
  /// Throws ErrorKind::invalid_input when a bound is violated.
  void validate() const;

  bool operator==(const KernelConfig&) const = default;
};

/// Parses {"wl_iterations":..,"pyramid_dims":..,...}; unset keys keep their
/// defaults and unknown keys are rejected.
KernelConfig parse_kernel_config(std::string_view json_text);
std::string kernel_config_json(const KernelConfig& cfg);

struct KernelScores {
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  double g4 = 0.0;
  double g5 = 0.0;
};

/// k(x,y) / sqrt(k(x,x) k(y,y)) clamped to [0,1]; 0 when a self-kernel is 0.
/// A negative self-kernel throws ErrorKind::internal.
double normalize_kernel(double kxy, double kxx, double kyy);

/// Raw (unnormalized) kernel triple for one pair: cross, self of g1, self of g2.
struct RawKernel {
  double cross = 0.0;
  double self_a = 0.0;
  double self_b = 0.0;

  double normalized() const { return normalize_kernel(cross, self_a, self_b); }
};

RawKernel wl_vertex_histogram_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});
RawKernel wl_edge_histogram_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});
RawKernel shortest_path_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});
RawKernel subgraph_matching_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});
RawKernel pyramid_match_raw(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});

/// g4: WL relabeling seeded with variable names; edge polarity ignored.
double wl_vertex_histogram(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});
/// g5: WL relabeling seeded with one constant label; features are
/// (label(src), label(dst), polarity) per edge. Variable names ignored.
double wl_edge_histogram(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});
/// g2: equal-length directed shortest paths with equal endpoint names.
double shortest_path_kernel(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});
/// g3: weighted count of cliques of size 1..k in the name-matched product graph.
double subgraph_matching_kernel(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});
/// g1: per-name histogram pyramids over a spectral vertex embedding.
double pyramid_match_kernel(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});

/// Vertex coordinates in [0,1]^dims: absolute components of the `dims`
/// eigenvectors of the undirected adjacency matrix with the largest
/// |eigenvalue|. Ties in |eigenvalue| are broken by comparing the eigenvectors
/// lexicographically after making their first nonzero component positive.
/// Coordinates are rounded to 9 decimals. Missing dimensions are zero. Row v
/// holds vertex v.
std::vector<std::vector<double>> spectral_embedding(const CausalGraph& g, int dims);

/// All-pairs directed hop distances; -1 when unreachable. Row-major n x n.
std::vector<int> shortest_path_lengths(const CausalGraph& g);

double kernel(Metric which, const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});

KernelScores kernel_scores(const CausalGraph& a, const CausalGraph& b, const KernelConfig& cfg = {});

/// Normalized kernel matrix, row-major, symmetric with a unit diagonal for
/// graphs whose self-kernel is positive.
std::vector<double> gram_matrix(const std::vector<CausalGraph>& graphs, Metric which, const KernelConfig& cfg = {});

}  // namespace cldsim
