#pragma once

#include <cstddef>
#include <optional>

#include "cldsim/graph.hpp"

namespace cldsim {

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t cycles = 0;
  double density = 0.0;
  double transitivity = 0.0;
  /// Absent when nodes < 2.
  std::optional<double> avg_connectivity;
};

inline constexpr std::size_t default_cycle_cap = 10'000;

/// m / (n(n-1)); 0 when n < 2.
double density(const CausalGraph& g);

/// 3 * triangles / connected triples, on the undirected projection. 0 when
/// there are no connected triples.
double transitivity(const CausalGraph& g);

/// Internally vertex-disjoint u-v paths in the undirected projection; a
/// direct edge counts as one path.
std::size_t local_node_connectivity(const CausalGraph& g, std::size_t u, std::size_t v);

/// Mean local node connectivity over all unordered pairs. Throws
/// ErrorKind::undefined_statistic when n < 2.
double average_connectivity(const CausalGraph& g);

/// Number of simple directed cycles (Johnson's algorithm). Throws
/// ErrorKind::resource_limit once more than `cap` cycles are found.
std::size_t count_cycles(const CausalGraph& g, std::size_t cap = default_cycle_cap);

GraphStats stats(const CausalGraph& g, std::size_t cycle_cap = default_cycle_cap);

}  // namespace cldsim
