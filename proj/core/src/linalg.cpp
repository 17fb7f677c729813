#include "entprop/linalg.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include <fmt/core.h>

#include "entprop/errors.hpp"

namespace entprop {

double LogDet::abs_value() const noexcept { return sign == 0 ? 0.0 : std::exp(log_abs); }

LuDecomposition::LuDecomposition(const Matrix& a) : lu_(a), perm_(a.rows()) {
  if (!a.is_square()) {
    throw DimensionError(fmt::format("LU needs a square matrix, got {}x{}", a.rows(), a.cols()));
  }
  const std::size_t n = a.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::fabs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::fabs(lu_(i, k));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (best < kSingularPivot) {
      singular_ = true;
      return;
    }
    if (pivot != k) {
      auto rk = lu_.row(k);
      auto rp = lu_.row(pivot);
      std::swap_ranges(rk.begin(), rk.end(), rp.begin());
      std::swap(perm_[k], perm_[pivot]);
      parity_ = -parity_;
    }
    const double diag = lu_(k, k);
    const auto urow = lu_.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      auto ri = lu_.row(i);
      const double l = ri[k] / diag;
      ri[k] = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * urow[j];
    }
  }
}

LogDet LuDecomposition::log_abs_det() const noexcept {
  if (singular_) return {-std::numeric_limits<double>::infinity(), 0};
  LogDet out{0.0, parity_};
  for (std::size_t k = 0; k < lu_.rows(); ++k) {
    const double u = lu_(k, k);
    out.log_abs += std::log(std::fabs(u));
    if (u < 0.0) out.sign = -out.sign;
  }
  return out;
}

std::vector<double> LuDecomposition::solve(std::vector<double> b) const {
  if (singular_) throw SingularMatrixError("solve with a singular matrix");
  const std::size_t n = size();
  if (b.size() != n) throw DimensionError("right-hand side length mismatch");
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = lu_.row(i);
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= r[j] * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    const auto r = lu_.row(i);
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= r[j] * x[j];
    x[i] = s / r[i];
  }
  return x;
}

std::vector<double> LuDecomposition::solve_transposed(std::vector<double> b) const {
  if (singular_) throw SingularMatrixError("solve with a singular matrix");
  const std::size_t n = size();
  if (b.size() != n) throw DimensionError("right-hand side length mismatch");
  // A^T = U^T L^T P, so solve U^T z = b, then L^T w = z, then x = P^T w.
  std::vector<double>& z = b;
  for (std::size_t i = 0; i < n; ++i) {
    double s = z[i];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(j, i) * z[j];
    z[i] = s / lu_(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = z[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(j, i) * z[j];
    z[i] = s;
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = z[i];
  return x;
}

Matrix LuDecomposition::inverse() const {
  if (singular_) throw SingularMatrixError("inverse of a singular matrix");
  const std::size_t n = size();
  // Solves A X = I for all columns at once; row operations keep the inner
  // loops contiguous.
  Matrix x(n, n);
  for (std::size_t i = 0; i < n; ++i) x(i, perm_[i]) = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = x.row(i).data();
    for (std::size_t j = 0; j < i; ++j) {
      const double l = lu_(i, j);
      if (l == 0.0) continue;
      const double* xj = x.row(j).data();
      for (std::size_t c = 0; c < n; ++c) xi[c] -= l * xj[c];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double* xi = x.row(i).data();
    for (std::size_t j = i + 1; j < n; ++j) {
      const double u = lu_(i, j);
      if (u == 0.0) continue;
      const double* xj = x.row(j).data();
      for (std::size_t c = 0; c < n; ++c) xi[c] -= u * xj[c];
    }
    const double d = lu_(i, i);
    for (std::size_t c = 0; c < n; ++c) xi[c] /= d;
  }
  return x;
}

Matrix LuDecomposition::inverse_transpose() const { return transpose(inverse()); }

LogDet lu_logabsdet(const Matrix& m) { return LuDecomposition(m).log_abs_det(); }

}  // namespace entprop
