#include "entprop/conv.hpp"

#include <fmt/core.h>

#include "entprop/errors.hpp"

namespace entprop {

Matrix conv2d(const Matrix& input, const Matrix& filter) {
  const std::size_t l = input.rows(), w = input.cols();
  const std::size_t p = filter.rows(), q = filter.cols();
  if (p == 0 || q == 0 || p > l || q > w) {
    throw DimensionError(fmt::format("filter {}x{} does not fit input {}x{}", p, q, l, w));
  }
  Matrix out(l - p + 1, w - q + 1);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k)
        for (std::size_t m = 0; m < q; ++m) s += filter(k, m) * input(i + k, j + m);
      out(i, j) = s;
    }
  }
  return out;
}

PoolResult maxpool2(const Matrix& input) {
  const std::size_t oh = input.rows() / 2, ow = input.cols() / 2;
  if (oh == 0 || ow == 0) {
    throw DimensionError(fmt::format("maxpool2 needs at least 2x2 input, got {}x{}", input.rows(),
                                     input.cols()));
  }
  PoolResult res{Matrix(oh, ow), std::vector<std::size_t>(oh * ow)};
  for (std::size_t i = 0; i < oh; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      std::size_t best = (2 * i) * input.cols() + 2 * j;
      for (std::size_t di = 0; di < 2; ++di) {
        for (std::size_t dj = 0; dj < 2; ++dj) {
          const std::size_t idx = (2 * i + di) * input.cols() + 2 * j + dj;
          if (input.data()[idx] > input.data()[best]) best = idx;
        }
      }
      res.output(i, j) = input.data()[best];
      res.argmax[i * ow + j] = best;
    }
  }
  return res;
}

}  // namespace entprop
