#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bcc {

// Solve A x = b for a dense k x k system (row-major A) with partial
// pivoting. Throws on a numerically singular pivot.
inline std::vector<double> solve_dense(int k, std::vector<double> A, std::vector<double> b) {
  if (k < 1) throw std::invalid_argument("solve_dense: k must be >= 1");
  if (A.size() != static_cast<std::size_t>(k) * k || b.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("solve_dense: dimension mismatch");
  }
  const auto at = [&](int i, int j) -> double& { return A[static_cast<std::size_t>(i) * k + j]; };
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    double best = std::fabs(at(col, col));
    for (int i = col + 1; i < k; ++i) {
      const double v = std::fabs(at(i, col));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) {
      throw std::runtime_error("solve_dense: singular system");
    }
    if (pivot != col) {
      for (int j = col; j < k; ++j) std::swap(at(pivot, j), at(col, j));
      std::swap(b[static_cast<std::size_t>(pivot)], b[static_cast<std::size_t>(col)]);
    }
    for (int i = col + 1; i < k; ++i) {
      const double f = at(i, col) / at(col, col);
      if (f == 0.0) continue;
      at(i, col) = 0.0;
      for (int j = col + 1; j < k; ++j) at(i, j) -= f * at(col, j);
      b[static_cast<std::size_t>(i)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(k));
  for (int i = k - 1; i >= 0; --i) {
    double acc = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) acc -= at(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = acc / at(i, i);
  }
  return x;
}

}  // namespace bcc
