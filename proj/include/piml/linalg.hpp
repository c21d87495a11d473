#ifndef PIML_LINALG_HPP_
#define PIML_LINALG_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace piml {

using Vector = std::vector<double>;

// Dense row-major matrix. Sizes here stay in the low hundreds, so no BLAS.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }

  Matrix transpose() const;
  Matrix operator*(const Matrix& rhs) const;
  Vector operator*(std::span<const double> x) const;
  Matrix operator+(const Matrix& rhs) const;
  Matrix operator-(const Matrix& rhs) const;
  Matrix scaled(double s) const;

  double max_abs() const;
  // max |A_ij - A_ji|
  double asymmetry() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
Vector axpy(double a, std::span<const double> x, std::span<const double> y);  // a*x + y
Vector subtract(std::span<const double> a, std::span<const double> b);

struct EigenDecomposition {
  Vector values;    // ascending
  Matrix vectors;   // column j is the eigenvector of values[j]
  int sweeps = 0;
  double off_norm = 0.0;  // final off-diagonal Frobenius norm
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
// tol * ||A||_F. The input must be symmetric.
EigenDecomposition jacobi_eigen(const Matrix& a, double tol = 1e-14, int max_sweeps = 100);

// Solves A x = b for symmetric positive definite A. Returns nullopt when the
// Cholesky factorization breaks down.
std::optional<Vector> cholesky_solve(const Matrix& a, std::span<const double> b);

// Gaussian elimination with partial pivoting; nullopt for (numerically)
// singular A.
std::optional<Vector> lu_solve(Matrix a, Vector b);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_halfwidth = 0.0;  // 95% confidence half-width (t-distribution)
  std::size_t points = 0;
};

// Least-squares fit y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);
// Least-squares fit of log(y) against log(x).
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace piml

#endif  // PIML_LINALG_HPP_
