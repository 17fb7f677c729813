#include "entprop/entropy_loss.hpp"

#include <cmath>

#include <fmt/core.h>

#include "entprop/entropy_analysis.hpp"
#include "entprop/errors.hpp"
#include "entprop/linalg.hpp"

namespace entprop {

double LambdaSchedule::dense_lambda(std::size_t layer) const {
  const auto it = dense.find(layer);
  return it == dense.end() ? dense_default : it->second;
}

double LambdaSchedule::conv_lambda(const SliceKey& key) const {
  const auto it = conv.find(key);
  return it == conv.end() ? conv_default : it->second;
}

namespace {

void check_epsilon(const LossForm& form) {
  if (form.kind == LossKind::reciprocal && !(form.epsilon > 0.0)) {
    throw ConfigError(fmt::format("reciprocal loss needs epsilon > 0, got {}", form.epsilon));
  }
}

// Loss contribution of one magnitude given in log space.
double term_value(double lambda, const LogDet& magnitude, const LossForm& form) {
  if (lambda == 0.0) return 0.0;
  if (form.kind == LossKind::log) return -lambda * magnitude.log_abs;
  return lambda / (magnitude.abs_value() + form.epsilon);
}

LogDet log_abs_scalar(double x) {
  if (x == 0.0) return {-INFINITY, 0};
  return {std::log(std::fabs(x)), x > 0.0 ? 1 : -1};
}

}  // namespace

double dense_entropy_loss(std::span<const DenseTerm> terms, const LambdaSchedule& schedule,
                          const LossForm& form) {
  check_epsilon(form);
  double total = 0.0;
  for (const auto& t : terms) {
    const double lambda = schedule.dense_lambda(t.layer);
    if (lambda == 0.0) continue;
    total += term_value(lambda, dense_entropy_delta(t.weights), form);
  }
  return total;
}

std::vector<Matrix> dense_entropy_loss_grad(std::span<const DenseTerm> terms,
                                            const LambdaSchedule& schedule, const LossForm& form) {
  check_epsilon(form);
  std::vector<Matrix> grads;
  grads.reserve(terms.size());
  for (const auto& t : terms) {
    Matrix g(t.weights.rows(), t.weights.cols());
    const double lambda = schedule.dense_lambda(t.layer);
    if (lambda != 0.0) {
      const LuDecomposition lu(square_part(t.weights));
      double coeff = 0.0;
      if (form.kind == LossKind::log) {
        if (lu.singular()) {
          throw SingularMatrixError(
              fmt::format("layer {}: log-form dense entropy gradient at a singular square part",
                          t.layer));
        }
        coeff = -lambda;
      } else if (!lu.singular()) {
        const double det = lu.log_abs_det().abs_value();
        const double denom = det + form.epsilon;
        coeff = -lambda * det / (denom * denom);
      }
      if (coeff != 0.0) {
        // d log|det W| / dW = W^{-T}
        const Matrix inv_t = lu.inverse_transpose();
        for (std::size_t r = 0; r < inv_t.rows(); ++r)
          for (std::size_t c = 0; c < inv_t.cols(); ++c) g(r, c) = coeff * inv_t(r, c);
      }
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double conv_entropy_loss(std::span<const ConvTerm> terms, const LambdaSchedule& schedule,
                         const LossForm& form) {
  check_epsilon(form);
  double total = 0.0;
  for (const auto& t : terms) {
    if (t.slice.empty()) throw DimensionError("empty conv filter slice");
    const double lambda = schedule.conv_lambda(t.key);
    if (lambda == 0.0) continue;
    total += term_value(lambda, log_abs_scalar(t.slice(0, 0)), form);
  }
  return total;
}

std::vector<Matrix> conv_entropy_loss_grad(std::span<const ConvTerm> terms,
                                           const LambdaSchedule& schedule, const LossForm& form) {
  check_epsilon(form);
  std::vector<Matrix> grads;
  grads.reserve(terms.size());
  for (const auto& t : terms) {
    if (t.slice.empty()) throw DimensionError("empty conv filter slice");
    Matrix g(t.slice.rows(), t.slice.cols());
    const double lambda = schedule.conv_lambda(t.key);
    const double c11 = t.slice(0, 0);
    if (lambda != 0.0) {
      if (form.kind == LossKind::log) {
        if (c11 == 0.0) {
          throw SingularMatrixError(fmt::format(
              "slice ({}, {}, {}): log-form conv entropy gradient at c11 = 0", t.key.layer,
              t.key.filter, t.key.channel));
        }
        g(0, 0) = -lambda / c11;
      } else if (c11 != 0.0) {
        const double denom = std::fabs(c11) + form.epsilon;
        g(0, 0) = -lambda * (c11 > 0.0 ? 1.0 : -1.0) / (denom * denom);
      }
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double compound_loss(double acc_loss, std::span<const DenseTerm> dense,
                     std::span<const ConvTerm> conv, const LambdaSchedule& schedule,
                     const LossForm& form) {
  return acc_loss + dense_entropy_loss(dense, schedule, form) +
         conv_entropy_loss(conv, schedule, form);
}

}  // namespace entprop
