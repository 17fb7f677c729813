#include "entprop/network_spec.hpp"

#include <fmt/core.h>

#include "entprop/errors.hpp"

namespace entprop {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

bool has_params(const Layer& layer) noexcept {
  return std::holds_alternative<DenseLayer>(layer) || std::holds_alternative<ConvLayer>(layer);
}

std::vector<Shape3> infer_shapes(const NetworkSpec& spec, const Shape3& input) {
  std::vector<Shape3> shapes{input};
  shapes.reserve(spec.layers.size() + 1);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const Shape3 cur = shapes.back();
    const Shape3 next = std::visit(
        Overloaded{
            [&](const DenseLayer& d) {
              if (d.in == 0 || d.out == 0 || cur.size() != d.in) {
                throw DimensionError(fmt::format("layer {}: dense expects {} inputs, got {}", i,
                                                 d.in, cur.size()));
              }
              return Shape3{1, 1, d.out};
            },
            [&](const ConvLayer& c) {
              if (c.filters == 0 || c.in_channels != cur.channels || c.kernel_h == 0 ||
                  c.kernel_w == 0 || c.kernel_h > cur.height || c.kernel_w > cur.width) {
                throw DimensionError(fmt::format(
                    "layer {}: conv {}x{}x{} does not fit input {}x{}x{}", i, c.in_channels,
                    c.kernel_h, c.kernel_w, cur.channels, cur.height, cur.width));
              }
              return Shape3{c.filters, cur.height - c.kernel_h + 1, cur.width - c.kernel_w + 1};
            },
            [&](const MaxPool2Layer&) {
              if (cur.height < 2 || cur.width < 2) {
                throw DimensionError(fmt::format("layer {}: maxpool2 on {}x{} input", i,
                                                 cur.height, cur.width));
              }
              return Shape3{cur.channels, cur.height / 2, cur.width / 2};
            },
            [&](const ActivationLayer& a) {
              if (a.fn == Activation::softmax && i + 1 != spec.layers.size()) {
                throw DimensionError(fmt::format("layer {}: softmax must be the final layer", i));
              }
              return cur;
            },
        },
        spec.layers[i]);
    shapes.push_back(next);
  }
  return shapes;
}

void check_params(const NetworkSpec& spec, const Parameters& params) {
  if (params.size() != spec.layers.size()) {
    throw DimensionError(fmt::format("{} parameter entries for {} layers", params.size(),
                                     spec.layers.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    std::size_t rows = 0, cols = 0;
    if (const auto* d = std::get_if<DenseLayer>(&spec.layers[i])) {
      rows = d->out;
      cols = d->in;
    } else if (const auto* c = std::get_if<ConvLayer>(&spec.layers[i])) {
      rows = c->filters;
      cols = c->in_channels * c->kernel_h * c->kernel_w;
    }
    if (p.weights.rows() != rows || p.weights.cols() != cols || p.bias.size() != rows) {
      throw DimensionError(fmt::format(
          "layer {}: parameters {}x{} (+{} bias) do not match expected {}x{} (+{} bias)", i,
          p.weights.rows(), p.weights.cols(), p.bias.size(), rows, cols, rows));
    }
  }
}

Parameters zero_params(const NetworkSpec& spec) {
  Parameters out(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (const auto* d = std::get_if<DenseLayer>(&spec.layers[i])) {
      out[i] = {Matrix(d->out, d->in), std::vector<double>(d->out, 0.0)};
    } else if (const auto* c = std::get_if<ConvLayer>(&spec.layers[i])) {
      out[i] = {Matrix(c->filters, c->in_channels * c->kernel_h * c->kernel_w),
                std::vector<double>(c->filters, 0.0)};
    }
  }
  return out;
}

std::vector<std::size_t> weight_layer_ordinals(const NetworkSpec& spec) {
  std::vector<std::size_t> out(spec.layers.size(), 0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i)
    if (has_params(spec.layers[i])) out[i] = ++n;
  return out;
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::softmax: return "softmax";
  }
  return "unknown";
}

std::string describe(const Layer& layer) {
  return std::visit(
      Overloaded{
          [](const DenseLayer& d) { return fmt::format("dense({}->{})", d.in, d.out); },
          [](const ConvLayer& c) {
            return fmt::format("conv({}x{}x{}, {} filters)", c.in_channels, c.kernel_h,
                               c.kernel_w, c.filters);
          },
          [](const MaxPool2Layer&) { return std::string("maxpool2"); },
          [](const ActivationLayer& a) { return to_string(a.fn); },
      },
      layer);
}

}  // namespace entprop
