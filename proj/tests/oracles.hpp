// Test-only reference implementations, kept independent of the library's
// code paths: plain Gaussian elimination instead of the library Cholesky,
// generic central differences, naive quadrature.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

/// Gauss-Jordan with partial pivoting.
inline Vec dense_solve(Mat a, Vec b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    const double d = a[col][col];
    for (std::size_t c = col; c < n; ++c) a[col][c] /= d;
    b[col] /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  return b;
}

/// Central-difference gradient of a scalar function of a flat vector.
inline Vec central_difference(const std::function<double(const Vec&)>& f, Vec x,
                              double h = 1e-5) {
  Vec grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

/// Relative disagreement between two gradients: |a - b| / max(1, |b|).
inline double gradient_mismatch(const Vec& a, const Vec& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(1.0, std::sqrt(den));
}

/// Trapezoid rule on a uniform grid.
inline double trapezoid(const std::function<double(double)>& f, double lo, double hi,
                        std::size_t n_points) {
  const double h = (hi - lo) / static_cast<double>(n_points - 1);
  double acc = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i + 1 < n_points; ++i) acc += f(lo + h * static_cast<double>(i));
  return acc * h;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace oracles
