// Rectangular maximum-weight assignment by the Hungarian method
// (shortest augmenting paths with potentials), O(m^3) for m = max(rows, cols).
#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace doh::detail {

/// weight[r][c] >= 0. Returns, for every row, the matched column or -1 when
/// the row is left unmatched (only possible when rows > cols). Every column
/// is matched when rows >= cols.
inline std::vector<long> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
  const std::size_t rows = weight.size();
  const std::size_t cols = rows == 0 ? 0 : weight.front().size();
  const std::size_t m = std::max(rows, cols);
  if (m == 0) return {};

  double wmax = 0.0;
  for (const auto& r : weight)
    for (double w : r) wmax = std::max(wmax, w);
  // cost(r, c) = wmax - w, padding cells cost wmax; 1-based potentials.
  auto cost = [&](std::size_t r, std::size_t c) {
    return (r < rows && c < cols) ? wmax - weight[r][c] : wmax;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
  for (std::size_t r = 1; r <= m; ++r) {
    match[0] = r;
    std::size_t c0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[c0] = true;
      const std::size_t r0 = match[c0];
      double delta = inf;
      std::size_t c1 = 0;
      for (std::size_t c = 1; c <= m; ++c) {
        if (used[c]) continue;
        const double cur = cost(r0 - 1, c - 1) - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = c0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          c1 = c;
        }
      }
      for (std::size_t c = 0; c <= m; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      c0 = c1;
    } while (match[c0] != 0);
    do {
      const std::size_t c1 = way[c0];
      match[c0] = match[c1];
      c0 = c1;
    } while (c0 != 0);
  }

  std::vector<long> row_to_col(rows, -1);
  for (std::size_t c = 1; c <= m; ++c) {
    const std::size_t r = match[c];
    if (r >= 1 && r <= rows && c <= cols) row_to_col[r - 1] = static_cast<long>(c - 1);
  }
  return row_to_col;
}

}  // namespace doh::detail
