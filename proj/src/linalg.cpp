#include "svrpo/linalg.hpp"

#include <cmath>
#include <string>

#include "svrpo/errors.hpp"

namespace svrpo {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ArgumentError("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Vector axpy(double alpha, const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw ArgumentError("axpy: dimension mismatch");
  Vector out(y);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
  return out;
}

void axpy_inplace(double alpha, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw ArgumentError("axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) throw ArgumentError("matvec: dimension mismatch");
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

std::pair<double, double> mean_and_var(const Vector& samples) {
  if (samples.empty()) throw ArgumentError("mean_and_var: empty sample set");
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(samples.size());
  return {mean, var};
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

Vector scaled(const Vector& v, double alpha) {
  Vector out(v);
  for (double& x : out) x *= alpha;
  return out;
}

void check_finite(const Vector& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x))
      throw NumericalError(std::string(what) + ": non-finite value");
}

Vector solve_spd(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n)
    throw ArgumentError("solve_spd: dimension mismatch");
  // In-place Cholesky A = L L^T (lower triangle).
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw NumericalError("solve_spd: matrix not positive definite");
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
  }
  // Forward substitution L y = b.
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i);
  }
  // Back substitution L^T x = y.
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= a(k, ii) * b[k];
    b[ii] = s / a(ii, ii);
  }
  return b;
}

}  // namespace svrpo
