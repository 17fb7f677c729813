#include "entprop/tensor.hpp"

#include <algorithm>
#include <cstring>

#include <fmt/core.h>

#include "entprop/errors.hpp"

namespace entprop {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError(fmt::format("matrix {}x{} given {} values", rows, cols, data_.size()));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nrows, std::size_t ncols) const {
  if (r0 + nrows > rows_ || c0 + ncols > cols_) {
    throw DimensionError(fmt::format("block ({},{})+{}x{} outside {}x{} matrix", r0, c0, nrows,
                                     ncols, rows_, cols_));
  }
  Matrix out(nrows, ncols);
  for (std::size_t r = 0; r < nrows; ++r) {
    const auto src = row(r0 + r).subspan(c0, ncols);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& src) {
  if (r0 + src.rows() > rows_ || c0 + src.cols() > cols_) {
    throw DimensionError(fmt::format("block ({},{})+{}x{} outside {}x{} matrix", r0, c0,
                                     src.rows(), src.cols(), rows_, cols_));
  }
  for (std::size_t r = 0; r < src.rows(); ++r) {
    const auto s = src.row(r);
    std::copy(s.begin(), s.end(), row(r0 + r).begin() + static_cast<std::ptrdiff_t>(c0));
  }
}

Tensor3::Tensor3(std::size_t channels, std::size_t height, std::size_t width, double fill)
    : channels_(channels), height_(height), width_(width), data_(channels * height * width, fill) {}

Tensor3::Tensor3(std::size_t channels, std::size_t height, std::size_t width,
                 std::vector<double> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != channels * height * width) {
    throw DimensionError(fmt::format("tensor {}x{}x{} given {} values", channels, height, width,
                                     data_.size()));
  }
}

Matrix Tensor3::channel(std::size_t c) const {
  if (c >= channels_) throw DimensionError(fmt::format("channel {} of {}", c, channels_));
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(c * height_ * width_);
  return Matrix(height_, width_, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(height_ * width_)));
}

void Tensor3::set_channel(std::size_t c, const Matrix& plane) {
  if (c >= channels_ || plane.rows() != height_ || plane.cols() != width_) {
    throw DimensionError("channel plane does not match tensor shape");
  }
  std::copy(plane.data().begin(), plane.data().end(),
            data_.begin() + static_cast<std::ptrdiff_t>(c * height_ * width_));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError(fmt::format("matmul {}x{} by {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto src = b.row(k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

namespace {

using V4 = double __attribute__((vector_size(32)));

// R rows x 8 columns of c starting at (i, j), kept in registers while the
// k loop runs; every accumulator adds its terms in increasing k.
template <std::size_t R>
void gemm_tile(const double* pa, const double* pb, double* pc, std::size_t kk, std::size_t n,
               std::size_t i, std::size_t j) {
  V4 lo[R];
  V4 hi[R];
  for (std::size_t r = 0; r < R; ++r) {
    std::memcpy(&lo[r], pc + (i + r) * n + j, sizeof(V4));
    std::memcpy(&hi[r], pc + (i + r) * n + j + 4, sizeof(V4));
  }
  for (std::size_t k = 0; k < kk; ++k) {
    V4 b0;
    V4 b1;
    std::memcpy(&b0, pb + k * n + j, sizeof(V4));
    std::memcpy(&b1, pb + k * n + j + 4, sizeof(V4));
    for (std::size_t r = 0; r < R; ++r) {
      const double av = pa[(i + r) * kk + k];
      lo[r] += av * b0;
      hi[r] += av * b1;
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    std::memcpy(pc + (i + r) * n + j, &lo[r], sizeof(V4));
    std::memcpy(pc + (i + r) * n + j + 4, &hi[r], sizeof(V4));
  }
}

// The last n - j (< 8) columns of R rows, same summation order.
template <std::size_t R>
void gemm_tail(const double* pa, const double* pb, double* pc, std::size_t kk, std::size_t n,
               std::size_t i, std::size_t j) {
  const std::size_t w = n - j;
  double acc[R][8];
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t q = 0; q < w; ++q) acc[r][q] = pc[(i + r) * n + j + q];
  for (std::size_t k = 0; k < kk; ++k) {
    const double* brow = pb + k * n + j;
    for (std::size_t r = 0; r < R; ++r) {
      const double av = pa[(i + r) * kk + k];
      for (std::size_t q = 0; q < w; ++q) acc[r][q] += av * brow[q];
    }
  }
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t q = 0; q < w; ++q) pc[(i + r) * n + j + q] = acc[r][q];
}

template <std::size_t R>
void gemm_rows(const double* pa, const double* pb, double* pc, std::size_t kk, std::size_t n,
               std::size_t i) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) gemm_tile<R>(pa, pb, pc, kk, n, i, j);
  if (j < n) gemm_tail<R>(pa, pb, pc, kk, n, i, j);
}

}  // namespace

void gemm_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols()) {
    throw DimensionError(fmt::format("gemm {}x{} by {}x{} into {}x{}", a.rows(), a.cols(), b.rows(),
                                     b.cols(), c.rows(), c.cols()));
  }
  const std::size_t m = a.rows();
  const std::size_t kk = a.cols();
  const std::size_t n = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) gemm_rows<4>(pa, pb, pc, kk, n, i);
  for (; i < m; ++i) gemm_rows<1>(pa, pb, pc, kk, n, i);
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
  return out;
}

Matrix flatten(const Matrix& m) {
  return Matrix(m.size(), 1, std::vector<double>(m.data().begin(), m.data().end()));
}

Matrix reshape(const Matrix& column, std::size_t rows, std::size_t cols) {
  if (column.size() != rows * cols) {
    throw DimensionError(fmt::format("cannot reshape {} values to {}x{}", column.size(), rows, cols));
  }
  return Matrix(rows, cols, std::vector<double>(column.data().begin(), column.data().end()));
}

}  // namespace entprop
