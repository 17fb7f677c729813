#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "entprop/tensor.hpp"

namespace entprop {

struct Shape3 {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  [[nodiscard]] std::size_t size() const noexcept { return channels * height * width; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

/// Fully connected layer; weights are out x in, bias has `out` entries.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Valid, unit-stride convolution. Weights are stored as a
/// filters x (in_channels * kernel_h * kernel_w) matrix, each row laid out
/// channel-major then row-major; bias has one entry per filter.
struct ConvLayer {
  std::size_t filters = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t in_channels = 0;
  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

struct MaxPool2Layer {
  friend bool operator==(const MaxPool2Layer&, const MaxPool2Layer&) = default;
};

enum class Activation : unsigned char { sigmoid = 0, leaky_relu = 1, softmax = 2 };

struct ActivationLayer {
  Activation fn = Activation::sigmoid;
  friend bool operator==(const ActivationLayer&, const ActivationLayer&) = default;
};

using Layer = std::variant<DenseLayer, ConvLayer, MaxPool2Layer, ActivationLayer>;

struct NetworkSpec {
  std::vector<Layer> layers;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct LayerParams {
  Matrix weights;
  std::vector<double> bias;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// One entry per layer of the spec; non-parametric layers hold empty params.
using Parameters = std::vector<LayerParams>;

[[nodiscard]] bool has_params(const Layer& layer) noexcept;

/// Shape after each layer for a given input shape (element 0 is the input).
/// Dense layers accept any input whose flattened size equals `in`.
/// Throws DimensionError on incompatible adjacent layers or a misplaced softmax.
std::vector<Shape3> infer_shapes(const NetworkSpec& spec, const Shape3& input);

/// Throws DimensionError unless every parametric layer has correctly sized weights.
void check_params(const NetworkSpec& spec, const Parameters& params);

/// Zero-initialized parameters matching the spec.
Parameters zero_params(const NetworkSpec& spec);

/// 1-based ordinal of a parametric layer among the dense/conv layers of the
/// spec (the "layer 1" numbering used by entropy-loss configuration);
/// 0 for non-parametric layers.
std::vector<std::size_t> weight_layer_ordinals(const NetworkSpec& spec);

std::string to_string(Activation a);
std::string describe(const Layer& layer);

}  // namespace entprop
