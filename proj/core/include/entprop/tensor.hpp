#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace entprop {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  /// Row-wise literal, e.g. `Matrix{{1, 2}, {3, 4}}`. Rows must be equal length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  /// Copy of the block starting at (r0, c0) with the given extent.
  [[nodiscard]] Matrix block(std::size_t r0, std::size_t c0, std::size_t nrows,
                             std::size_t ncols) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& src);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Channel-major, then row-major rank-3 array (channels x height x width).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0);
  Tensor3(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> data);

  [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
  [[nodiscard]] std::size_t height() const noexcept { return height_; }
  [[nodiscard]] std::size_t width() const noexcept { return width_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t c, std::size_t r, std::size_t col) noexcept {
    return data_[(c * height_ + r) * width_ + col];
  }
  double operator()(std::size_t c, std::size_t r, std::size_t col) const noexcept {
    return data_[(c * height_ + r) * width_ + col];
  }

  [[nodiscard]] Matrix channel(std::size_t c) const;
  void set_channel(std::size_t c, const Matrix& plane);

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Standard product. Each output entry accumulates over k in increasing order.
Matrix matmul(const Matrix& a, const Matrix& b);

/// c += a * b. Each c entry starts from its current value and accumulates
/// over k in increasing order, so the result equals the naive triple loop
/// bit for bit.
void gemm_accumulate(const Matrix& a, const Matrix& b, Matrix& c);

Matrix transpose(const Matrix& m);

/// Concatenates the rows of `m` into an (rows*cols) x 1 column.
Matrix flatten(const Matrix& m);

/// Inverse of `flatten`: fills a rows x cols matrix row by row from `column`.
Matrix reshape(const Matrix& column, std::size_t rows, std::size_t cols);

}  // namespace entprop
