#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "entprop/tensor.hpp"

namespace entprop {

enum class LossKind {
  log,         // -lambda * log|x|
  reciprocal,  // lambda / (|x| + epsilon)
};

inline constexpr double kDefaultLossEpsilon = 1e-4;

struct LossForm {
  LossKind kind = LossKind::reciprocal;
  double epsilon = kDefaultLossEpsilon;
};

struct SliceKey {
  std::size_t layer = 0;
  std::size_t filter = 0;
  std::size_t channel = 0;
  friend auto operator<=>(const SliceKey&, const SliceKey&) = default;
};

/// Per-layer (dense) and per-slice (conv) loss weights. Missing entries fall
/// back to the global defaults. Negative values are allowed and flip the
/// direction of the penalty.
struct LambdaSchedule {
  double dense_default = 0.0;
  double conv_default = 0.0;
  std::map<std::size_t, double> dense;
  std::map<SliceKey, double> conv;

  [[nodiscard]] double dense_lambda(std::size_t layer) const;
  [[nodiscard]] double conv_lambda(const SliceKey& key) const;
};

struct DenseTerm {
  std::size_t layer = 0;
  Matrix weights;  // full N x d matrix; only the square part enters the loss
};

struct ConvTerm {
  SliceKey key;
  Matrix slice;  // p x q filter slice; only c11 enters the loss
};

/// log form:        -sum_l lambda_l * log|det(square_part(W_l))|
/// reciprocal form:  sum_l lambda_l / (|det(square_part(W_l))| + eps)
/// A singular square part gives +inf (log, lambda > 0) or lambda / eps.
double dense_entropy_loss(std::span<const DenseTerm> terms, const LambdaSchedule& schedule,
                          const LossForm& form);

/// Gradient with respect to each full weight matrix, zero outside the square
/// part. Log form needs nonsingular square parts (SingularMatrixError
/// otherwise); the reciprocal form yields a zero gradient at |det| = 0.
std::vector<Matrix> dense_entropy_loss_grad(std::span<const DenseTerm> terms,
                                            const LambdaSchedule& schedule, const LossForm& form);

/// log form: -sum lambda * log|c11|; reciprocal form: sum lambda / (|c11| + eps).
double conv_entropy_loss(std::span<const ConvTerm> terms, const LambdaSchedule& schedule,
                         const LossForm& form);

/// Gradient per slice, nonzero only at (0, 0).
std::vector<Matrix> conv_entropy_loss_grad(std::span<const ConvTerm> terms,
                                           const LambdaSchedule& schedule, const LossForm& form);

/// L = L_acc + L_dense + L_conv with the lambdas folded into the sums.
double compound_loss(double acc_loss, std::span<const DenseTerm> dense,
                     std::span<const ConvTerm> conv, const LambdaSchedule& schedule,
                     const LossForm& form);

}  // namespace entprop
