#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace cldsim {

struct Assignment {
  /// row_to_col[i] is the column matched to row i, or nullopt.
  std::vector<std::optional<std::size_t>> row_to_col;
  double total = 0.0;
};

/// Maximum-weight one-to-one assignment on a dense rows x cols matrix
/// (row-major). Matches min(rows, cols) pairs. Hungarian method with
/// potentials, O(min^2 * max).
Assignment max_weight_assignment(const std::vector<double>& weights, std::size_t rows, std::size_t cols);

}  // namespace cldsim
