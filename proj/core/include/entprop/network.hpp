#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

#include "entprop/entropy_loss.hpp"
#include "entprop/network_spec.hpp"
#include "entprop/tensor.hpp"

namespace entprop {

inline constexpr double kLeakySlope = 0.01;

enum class BaseLoss { mse, cross_entropy };

/// Uniform Glorot initialization (limit sqrt(6 / (fan_in + fan_out)), conv fans
/// scaled by the kernel area), zero biases.
Parameters glorot_init(const NetworkSpec& spec, std::uint64_t seed);

/// Activations of a batch. Row b of every matrix is one sample, flattened
/// channel-major. `values[i]` enters layer i (so for an activation layer it
/// is the pre-activation); `values.back()` is the network output.
struct ForwardCache {
  std::vector<Shape3> shapes;
  std::vector<Matrix> values;
  /// For maxpool layers: per sample, the flat input index chosen for each output.
  std::vector<std::vector<std::size_t>> pool_argmax;

  [[nodiscard]] const Matrix& output() const { return values.back(); }
};

ForwardCache forward(const NetworkSpec& spec, const Parameters& params, const Matrix& batch,
                     const Shape3& input_shape);

/// Gradient of a scalar loss flowing into the network at `layer`: `grad` is
/// dL/d(values[layer]) of the forward cache.
struct LossGradient {
  double loss = 0.0;
  std::size_t layer = 0;
  Matrix grad;
};

/// MSE: mean over batch and features of (y - t)^2, gradient on the output.
/// Cross-entropy: requires a final softmax; the gradient (s - t) / B is
/// taken with respect to the softmax input (logits).
LossGradient base_loss(const NetworkSpec& spec, const ForwardCache& cache, const Matrix& targets,
                       BaseLoss kind);

/// Backpropagates `upstream` from the input of layer `upstream.layer` down to
/// the first layer and returns dL/dparams (zero entries for non-parametric
/// layers). No gradient is formed for the network input.
Parameters backward(const NetworkSpec& spec, const Parameters& params, const ForwardCache& cache,
                    const LossGradient& upstream);

/// Entropy-loss configuration attached to a network. `layers` holds 1-based
/// weight-layer ordinals (see weight_layer_ordinals); terms are keyed by that
/// ordinal in the schedule.
struct EntropyRegularizer {
  LambdaSchedule schedule;
  LossForm form;
  std::set<std::size_t> layers;
};

struct EntropyTerms {
  std::vector<DenseTerm> dense;
  std::vector<ConvTerm> conv;
  std::vector<std::size_t> dense_layer_pos;  // spec position of each dense term
  std::vector<std::size_t> conv_layer_pos;   // spec position of each conv term
};

EntropyTerms entropy_terms(const NetworkSpec& spec, const Parameters& params,
                           const std::set<std::size_t>& layers);

double entropy_loss(const NetworkSpec& spec, const Parameters& params,
                    const EntropyRegularizer& reg);

/// Adds the entropy-loss gradients of the configured layers into `grads`.
void add_entropy_gradients(const NetworkSpec& spec, const Parameters& params,
                           const EntropyRegularizer& reg, Parameters& grads);

/// Base loss plus entropy loss, and its full gradient.
struct CompoundEvaluation {
  double base = 0.0;
  double entropy = 0.0;
  Parameters grads;
  ForwardCache cache;
};

CompoundEvaluation evaluate_compound(const NetworkSpec& spec, const Parameters& params,
                                     const Matrix& batch, const Shape3& input_shape,
                                     const Matrix& targets, BaseLoss kind,
                                     const EntropyRegularizer& reg);

}  // namespace entprop
