#include "cldsim/assignment.hpp"

#include <limits>

#include "cldsim/error.hpp"

namespace cldsim {

namespace {

// Min-cost assignment of every row to a distinct column; requires n <= m.
// cost is 1-indexed in the classic formulation, here accessed via lambda.
template <typename Cost>
std::vector<std::size_t> hungarian_min(std::size_t n, std::size_t m, Cost cost) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Assignment max_weight_assignment(const std::vector<double>& weights, std::size_t rows, std::size_t cols) {
  if (weights.size() != rows * cols) throw Error(ErrorKind::invalid_input, "weight matrix has the wrong size");
  Assignment result;
  result.row_to_col.assign(rows, std::nullopt);
  if (rows == 0 || cols == 0) return result;

  if (rows <= cols) {
    auto match = hungarian_min(rows, cols, [&](std::size_t i, std::size_t j) { return -weights[i * cols + j]; });
    for (std::size_t i = 0; i < rows; ++i) result.row_to_col[i] = match[i];
  } else {
    auto match = hungarian_min(cols, rows, [&](std::size_t j, std::size_t i) { return -weights[i * cols + j]; });
    for (std::size_t j = 0; j < cols; ++j) result.row_to_col[match[j]] = j;
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (result.row_to_col[i]) result.total += weights[i * cols + *result.row_to_col[i]];
  }
  return result;
}

}  // namespace cldsim
