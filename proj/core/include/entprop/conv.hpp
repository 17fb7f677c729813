#pragma once

#include <cstddef>
#include <vector>

#include "entprop/tensor.hpp"

namespace entprop {

/// Valid 2D cross-correlation with unit stride:
/// Z(i, j) = sum_k sum_m C(k, m) * X(i + k, j + m), Z is (l-p+1) x (w-q+1).
Matrix conv2d(const Matrix& input, const Matrix& filter);

struct PoolResult {
  Matrix output;
  /// Row-major flat index into the input of the element selected for each
  /// output cell (first maximum in scan order on ties).
  std::vector<std::size_t> argmax;
};

/// 2x2 max pooling with stride 2. A trailing odd row/column is dropped.
PoolResult maxpool2(const Matrix& input);

}  // namespace entprop
