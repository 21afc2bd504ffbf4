#include "affine/numeric.hpp"

#include <Eigen/Dense>

namespace affine {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix m(static_cast<int>(e.rows()), static_cast<int>(e.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ ? static_cast<int>(rows.begin()->size()) : 0;
  data_.reserve(static_cast<std::size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_) throw std::invalid_argument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  const int n = static_cast<int>(d.size());
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) return {};
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < m.rows(); ++i) {
    if (static_cast<int>(rows[i].size()) != m.cols()) throw std::invalid_argument("Matrix: ragged rows");
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void Matrix::apply(std::span<const double> x, std::span<double> out) const {
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
    out[i] = s;
  }
}

void Matrix::apply_transpose(std::span<const double> x, std::span<double> out) const {
  for (int j = 0; j < cols_; ++j) out[j] = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out[j] += (*this)(i, j) * x[i];
}

Vec Matrix::operator*(std::span<const double> x) const {
  Vec out(rows_);
  apply(x, out);
  return out;
}

Matrix Matrix::operator*(const Matrix& other) const {
  if (cols_ != other.rows_) throw std::invalid_argument("Matrix: shape mismatch in product");
  Matrix out(rows_, other.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      for (int j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
    }
  return out;
}

Matrix Matrix::operator*(double s) const {
  Matrix out = *this;
  for (auto& v : out.data_) v *= s;
  return out;
}

Matrix Matrix::transpose() const {
  Matrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

Matrix Matrix::inverse() const {
  if (!square()) throw std::invalid_argument("Matrix: inverse of non-square matrix");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(*this));
  if (!lu.isInvertible()) throw std::invalid_argument("Matrix: singular matrix");
  return from_eigen(lu.inverse());
}

double Matrix::determinant() const {
  if (!square()) throw std::invalid_argument("Matrix: determinant of non-square matrix");
  if (rows_ == 0) return 1.0;
  return to_eigen(*this).fullPivLu().determinant();
}

double Matrix::min_singular_value() const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(*this));
  const auto& s = svd.singularValues();
  return s.size() ? s(s.size() - 1) : 0.0;
}

double Matrix::max_singular_value() const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(*this));
  const auto& s = svd.singularValues();
  return s.size() ? s(0) : 0.0;
}

std::vector<Vec> Matrix::to_rows() const {
  std::vector<Vec> rows(rows_, Vec(cols_));
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) rows[i][j] = (*this)(i, j);
  return rows;
}

Vec MatrixShape::vec(const Matrix& a) const {
  if (a.rows() != n || a.cols() != m) throw std::invalid_argument("MatrixShape: shape mismatch");
  Vec flat(static_cast<std::size_t>(n) * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) flat[static_cast<std::size_t>(j) * n + i] = a(i, j);
  return flat;
}

Matrix MatrixShape::unvec(std::span<const double> flat) const {
  if (static_cast<int>(flat.size()) != n * m) throw std::invalid_argument("MatrixShape: length mismatch");
  Matrix a(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = flat[static_cast<std::size_t>(j) * n + i];
  return a;
}

void MatrixShape::left_multiply(const Matrix& a, std::span<const double> u_flat, std::span<double> out) const {
  for (int j = 0; j < m; ++j) {
    const std::size_t off = static_cast<std::size_t>(j) * n;
    a.apply(u_flat.subspan(off, n), out.subspan(off, n));
  }
}

}  // namespace affine
