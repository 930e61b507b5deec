#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

namespace diarkit {

// Maximum-weight one-to-one assignment between rows and columns of a
// (possibly rectangular) weight matrix, via Kuhn-Munkres with potentials.
// Returns, for every row, the assigned column or -1. Rows paired only with
// padding are reported as -1.
inline std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights) {
  const std::size_t rows = weights.size();
  const std::size_t cols = rows == 0 ? 0 : weights.front().size();
  const std::size_t n = std::max(rows, cols);
  std::vector<int> result(rows, -1);
  if (rows == 0 || cols == 0) return result;

  double wmax = 0.0;
  for (const auto& r : weights) {
    for (double w : r) wmax = std::max(wmax, w);
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    if (i < rows && j < cols) return wmax - weights[i][j];
    return wmax;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; p[j] = row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
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
      for (std::size_t j = 0; j <= n; ++j) {
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
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j];
    if (i >= 1 && i <= rows && j <= cols) result[i - 1] = static_cast<int>(j - 1);
  }
  return result;
}

}  // namespace diarkit
