#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace affine {

using Vec = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Upper bound on the dimensions handled with stack buffers (m, n, nm).
inline constexpr int kMaxDim = 16;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double pow_nonneg(double base, double exponent) {
  if (base <= 0.0) return exponent > 0.0 ? 0.0 : (exponent == 0.0 ? 1.0 : kInf);
  return std::pow(base, exponent);
}

/// Small dense row-major matrix. Heavy algebra (inverse, determinant,
/// singular values) is delegated to Eigen in numeric.cpp.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_rows(const std::vector<Vec>& rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  std::span<const double> data() const { return data_; }

  /// out = M x
  void apply(std::span<const double> x, std::span<double> out) const;
  /// out = M^t x
  void apply_transpose(std::span<const double> x, std::span<double> out) const;
  Vec operator*(std::span<const double> x) const;

  Matrix operator*(const Matrix& other) const;
  Matrix operator*(double s) const;
  Matrix transpose() const;
  Matrix inverse() const;
  double determinant() const;
  double min_singular_value() const;
  double max_singular_value() const;

  std::vector<Vec> to_rows() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  Vec data_;
};

/// Identification of M_{n,m} with R^{nm} by stacking columns.
struct MatrixShape {
  int n = 1;
  int m = 1;

  int flat_dim() const { return n * m; }

  Vec vec(const Matrix& a) const;
  Matrix unvec(std::span<const double> flat) const;

  /// w = U^t v for U given in column-stacked form; w has m entries.
  void transpose_apply(std::span<const double> u_flat, std::span<const double> v, std::span<double> w) const {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      const double* col = u_flat.data() + static_cast<std::size_t>(j) * n;
      for (int i = 0; i < n; ++i) s += col[i] * v[i];
      w[j] = s;
    }
  }

  /// out = A U (A is n x n acting on each column).
  void left_multiply(const Matrix& a, std::span<const double> u_flat, std::span<double> out) const;
};

}  // namespace affine
