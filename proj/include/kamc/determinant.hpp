#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "kamc/error.hpp"
#include "kamc/matrix.hpp"

namespace kamc {

/// Pivots at or below this fraction of the largest input entry count as zero.
inline constexpr double kZeroPivotTolerance = 1e-12;

namespace detail {

/// In-place LU with partial pivoting on an n x n row-major buffer.
inline double lu_determinant(std::vector<double> a, std::size_t n) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  const double tiny = kZeroPivotTolerance * scale;

  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    const double p = a[pivot * n + col];
    if (std::abs(p) <= tiny) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      det = -det;
    }
    det *= p;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / p;
      if (factor == 0.0) continue;
      for (std::size_t c = col + 1; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
    }
  }
  return det;
}

/// Closed-form determinant for n <= 3 on a row-major buffer.
inline double small_determinant(const double* m, std::size_t n) {
  switch (n) {
    case 1:
      return m[0];
    case 2:
      return m[0] * m[3] - m[1] * m[2];
    default:
      return m[0] * (m[4] * m[8] - m[5] * m[7]) -
             m[1] * (m[3] * m[8] - m[5] * m[6]) +
             m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
}

}  // namespace detail

/// LU-based determinant, no small-size shortcut.
inline double lu_determinant(const Matrix& m) {
  if (!m.square()) throw DimensionError("determinant: matrix is not square");
  return detail::lu_determinant({m.data().begin(), m.data().end()}, m.rows());
}

/// det(M). Cofactor formula for n <= 3, partial-pivot LU above.
inline double determinant(const Matrix& m) {
  if (!m.square()) throw DimensionError("determinant: matrix is not square");
  if (m.rows() <= 3) return detail::small_determinant(m.data().data(), m.rows());
  return lu_determinant(m);
}

}  // namespace kamc
