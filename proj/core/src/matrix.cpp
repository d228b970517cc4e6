#include "cate/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cate/errors.hpp"

namespace cate {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                     " != " + std::to_string(rows_) + "x" +
                     std::to_string(cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::vector<double> Matrix::col(std::size_t c) const {
  if (c >= cols_) throw ShapeError("Matrix::col: index out of range");
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* o = out.row(i).data();
    const double* ai = a.row(i).data();
    for (std::size_t p = 0; p < k; ++p) {
      const double s = ai[p];
      const double* bp = b.row(p).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += s * bp[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("matmul_tn: row counts differ");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix out(k, m);
  for (std::size_t r = 0; r < n; ++r) {
    const double* ar = a.row(r).data();
    const double* br = b.row(r).data();
    for (std::size_t i = 0; i < k; ++i) {
      const double s = ar[i];
      double* o = out.row(i).data();
      for (std::size_t j = 0; j < m; ++j) o[j] += s * br[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt: column counts differ");
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.row(i).data();
    double* o = out.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      const double* bj = b.row(j).data();
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      o[j] = s;
    }
  }
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= m.rows()) throw ShapeError("gather_rows: index out of range");
    std::copy_n(m.row(idx[i]).begin(), m.cols(), out.row(i).begin());
  }
  return out;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("hstack: row counts differ");
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(a.row(r).begin(), a.row(r).end(), dst.begin());
    std::copy(b.row(r).begin(), b.row(r).end(), dst.begin() + a.cols());
  }
  return out;
}

Matrix append_column(const Matrix& m, std::span<const double> extra) {
  if (extra.size() != m.rows()) throw ShapeError("append_column: length mismatch");
  return hstack(m, Matrix::column(extra));
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw NonFiniteError(std::string(what) + ": non-finite value");
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NonFiniteError(std::string(what) + ": non-finite value");
  }
}

}  // namespace cate
