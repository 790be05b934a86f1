#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace svrpo {

/// All numeric storage is 64-bit; finite-difference checks at 1e-5 need it.
using Vector = std::vector<double>;

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  static Matrix identity(std::size_t n);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

/// Fixed left-to-right summation order throughout; results are bit-stable
/// across runs for identical inputs.
double dot(const Vector& a, const Vector& b);

/// y + alpha * x (new vector).
Vector axpy(double alpha, const Vector& x, const Vector& y);

/// y += alpha * x.
void axpy_inplace(double alpha, const Vector& x, Vector& y);

Vector matvec(const Matrix& m, const Vector& v);

/// (mean, population variance). Variance is 0 for a single sample.
std::pair<double, double> mean_and_var(const Vector& samples);

double norm2(const Vector& v);

Vector scaled(const Vector& v, double alpha);

/// Throws NumericalError naming `what` if any entry is NaN or infinite.
void check_finite(const Vector& v, const char* what);

/// Solve A x = b for symmetric positive definite A via Cholesky.
/// Throws NumericalError if the factorization breaks down.
Vector solve_spd(Matrix a, Vector b);

}  // namespace svrpo
