#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cate {

// Dense row-major matrix of doubles. Used for covariates, weights and
// activations alike.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  // n x 1 matrix holding `values`.
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::vector<double> col(std::size_t c) const;
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// transpose(a) * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * transpose(b)
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx);
// [a | b], row counts must agree.
Matrix hstack(const Matrix& a, const Matrix& b);
// Appends `extra` as a new last column.
Matrix append_column(const Matrix& m, std::span<const double> extra);

// Throws NonFiniteError naming `what` when any entry is NaN/Inf.
void require_finite(const Matrix& m, const char* what);
void require_finite(std::span<const double> v, const char* what);

}  // namespace cate
