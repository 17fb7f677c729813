#pragma once

#include <cstddef>
#include <vector>

#include "entprop/tensor.hpp"

namespace entprop {

/// log|det M| together with the sign of det M. A singular matrix has
/// sign 0 and log_abs = -infinity.
struct LogDet {
  double log_abs = 0.0;
  int sign = 1;

  [[nodiscard]] bool singular() const noexcept { return sign == 0; }
  /// |det M| recovered from log space; 0 when singular.
  [[nodiscard]] double abs_value() const noexcept;
};

/// Pivots with magnitude below this are treated as exact zeros.
inline constexpr double kSingularPivot = 1e-300;

/// Doolittle LU factorization with partial (row) pivoting: P*A = L*U, with L
/// unit lower triangular. Both factors are packed into one matrix.
class LuDecomposition {
 public:
  explicit LuDecomposition(const Matrix& a);

  [[nodiscard]] std::size_t size() const noexcept { return lu_.rows(); }
  [[nodiscard]] bool singular() const noexcept { return singular_; }
  [[nodiscard]] LogDet log_abs_det() const noexcept;

  /// Solves A x = b for one right-hand side.
  [[nodiscard]] std::vector<double> solve(std::vector<double> b) const;
  /// Solves A^T x = b for one right-hand side.
  [[nodiscard]] std::vector<double> solve_transposed(std::vector<double> b) const;

  /// A^{-1} and (A^{-1})^T from the stored factors. Throw SingularMatrixError
  /// when A is singular.
  [[nodiscard]] Matrix inverse() const;
  [[nodiscard]] Matrix inverse_transpose() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;  // row i of P*A is row perm_[i] of A
  int parity_ = 1;
  bool singular_ = false;
};

/// log|det M| via LU with partial pivoting. Non-square input throws DimensionError.
LogDet lu_logabsdet(const Matrix& m);

}  // namespace entprop
