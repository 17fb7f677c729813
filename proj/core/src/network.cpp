#include "entprop/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/core.h>

#include "entprop/errors.hpp"

namespace entprop {

Parameters glorot_init(const NetworkSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Parameters params = zero_params(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    double fan_in = 0.0, fan_out = 0.0;
    if (const auto* d = std::get_if<DenseLayer>(&spec.layers[i])) {
      fan_in = static_cast<double>(d->in);
      fan_out = static_cast<double>(d->out);
    } else if (const auto* c = std::get_if<ConvLayer>(&spec.layers[i])) {
      const double area = static_cast<double>(c->kernel_h * c->kernel_w);
      fan_in = static_cast<double>(c->in_channels) * area;
      fan_out = static_cast<double>(c->filters) * area;
    } else {
      continue;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : params[i].weights.data()) w = dist(rng);
  }
  return params;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_row(std::span<const double> z, std::span<double> out) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    out[k] = std::exp(z[k] - m);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
}

// Fraction of nonzero entries below which dense layers take the sparse path.
constexpr double kSparseDensity = 0.25;

bool mostly_zero(const Matrix& x) {
  std::size_t nz = 0;
  for (double v : x.data()) nz += v != 0.0;
  return static_cast<double>(nz) < kSparseDensity * static_cast<double>(x.size());
}

void dense_forward(const DenseLayer& d, const LayerParams& p, const Matrix& x, Matrix& y) {
  // y_b = W x_b + b, each entry summed from the bias in increasing k.
  const Matrix wt = transpose(p.weights);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    auto yrow = y.row(b);
    std::copy(p.bias.begin(), p.bias.end(), yrow.begin());
  }
  if (!mostly_zero(x)) {
    gemm_accumulate(x, wt, y);
    return;
  }
  for (std::size_t b = 0; b < x.rows(); ++b) {
    double* yrow = y.row(b).data();
    const double* xrow = x.row(b).data();
    for (std::size_t k = 0; k < d.in; ++k) {
      const double xv = xrow[k];
      if (xv == 0.0) continue;
      const double* wrow = wt.row(k).data();
      for (std::size_t o = 0; o < d.out; ++o) yrow[o] += xv * wrow[o];
    }
  }
}

// Patch matrix of one sample: row (ch, k, m) in the weight layout, column
// (i, j) over output positions.
Matrix im2col(const ConvLayer& c, const Shape3& in, const Shape3& out, const double* xs) {
  Matrix cols(c.in_channels * c.kernel_h * c.kernel_w, out.height * out.width);
  const std::size_t plane_in = in.height * in.width;
  std::size_t r = 0;
  for (std::size_t ch = 0; ch < c.in_channels; ++ch)
    for (std::size_t k = 0; k < c.kernel_h; ++k)
      for (std::size_t m = 0; m < c.kernel_w; ++m, ++r) {
        double* dst = cols.row(r).data();
        for (std::size_t i = 0; i < out.height; ++i) {
          const double* src = xs + ch * plane_in + (i + k) * in.width + m;
          std::copy(src, src + out.width, dst + i * out.width);
        }
      }
  return cols;
}

void conv_forward(const ConvLayer& c, const LayerParams& p, const Shape3& in, const Shape3& out,
                  const Matrix& x, Matrix& y) {
  // Each output sums from its bias over (ch, k, m) in weight-layout order.
  const std::size_t plane_out = out.height * out.width;
  Matrix planes(c.filters, plane_out);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    for (std::size_t f = 0; f < c.filters; ++f) {
      auto row = planes.row(f);
      std::fill(row.begin(), row.end(), p.bias[f]);
    }
    gemm_accumulate(p.weights, im2col(c, in, out, x.row(b).data()), planes);
    std::copy(planes.data().begin(), planes.data().end(), y.row(b).begin());
  }
}

void pool_forward(const Shape3& in, const Shape3& out, const Matrix& x, Matrix& y,
                  std::vector<std::size_t>& argmax) {
  argmax.assign(x.rows() * out.size(), 0);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto xs = x.row(b);
    auto ys = y.row(b);
    std::size_t* am = argmax.data() + b * out.size();
    for (std::size_t c = 0; c < in.channels; ++c) {
      for (std::size_t i = 0; i < out.height; ++i) {
        for (std::size_t j = 0; j < out.width; ++j) {
          const std::size_t base = (c * in.height + 2 * i) * in.width + 2 * j;
          std::size_t best = base;
          for (const std::size_t idx : {base + 1, base + in.width, base + in.width + 1})
            if (xs[idx] > xs[best]) best = idx;
          const std::size_t o = (c * out.height + i) * out.width + j;
          ys[o] = xs[best];
          am[o] = best;
        }
      }
    }
  }
}

void activation_forward(Activation fn, const Matrix& x, Matrix& y) {
  switch (fn) {
    case Activation::sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = sigmoid(x.data()[i]);
      break;
    case Activation::leaky_relu:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.data()[i];
        y.data()[i] = v > 0.0 ? v : kLeakySlope * v;
      }
      break;
    case Activation::softmax:
      for (std::size_t b = 0; b < x.rows(); ++b) softmax_row(x.row(b), y.row(b));
      break;
  }
}

}  // namespace

ForwardCache forward(const NetworkSpec& spec, const Parameters& params, const Matrix& batch,
                     const Shape3& input_shape) {
  ForwardCache cache;
  cache.shapes = infer_shapes(spec, input_shape);
  check_params(spec, params);
  if (batch.cols() != input_shape.size()) {
    throw DimensionError(fmt::format("batch has {} features, network input expects {}",
                                     batch.cols(), input_shape.size()));
  }
  const std::size_t n = spec.layers.size();
  cache.values.reserve(n + 1);
  cache.values.push_back(batch);
  cache.pool_argmax.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& x = cache.values[i];
    Matrix y(x.rows(), cache.shapes[i + 1].size());
    const Layer& layer = spec.layers[i];
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      dense_forward(*d, params[i], x, y);
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      conv_forward(*c, params[i], cache.shapes[i], cache.shapes[i + 1], x, y);
    } else if (std::holds_alternative<MaxPool2Layer>(layer)) {
      pool_forward(cache.shapes[i], cache.shapes[i + 1], x, y, cache.pool_argmax[i]);
    } else {
      activation_forward(std::get<ActivationLayer>(layer).fn, x, y);
    }
    cache.values.push_back(std::move(y));
  }
  return cache;
}

LossGradient base_loss(const NetworkSpec& spec, const ForwardCache& cache, const Matrix& targets,
                       BaseLoss kind) {
  const Matrix& out = cache.output();
  if (targets.rows() != out.rows() || targets.cols() != out.cols()) {
    throw DimensionError(fmt::format("targets {}x{} vs outputs {}x{}", targets.rows(),
                                     targets.cols(), out.rows(), out.cols()));
  }
  const std::size_t n = spec.layers.size();
  const double batch = static_cast<double>(out.rows());
  LossGradient res;

  if (kind == BaseLoss::mse) {
    const double scale = 1.0 / (batch * static_cast<double>(out.cols()));
    res.layer = n;
    res.grad = Matrix(out.rows(), out.cols());
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double diff = out.data()[i] - targets.data()[i];
      sum += diff * diff;
      res.grad.data()[i] = 2.0 * diff * scale;
    }
    res.loss = sum * scale;
    return res;
  }

  const auto* head = n == 0 ? nullptr : std::get_if<ActivationLayer>(&spec.layers[n - 1]);
  if (head == nullptr || head->fn != Activation::softmax) {
    throw ConfigError("cross-entropy loss needs a final softmax layer");
  }
  const Matrix& logits = cache.values[n - 1];
  res.layer = n - 1;
  res.grad = Matrix(out.rows(), out.cols());
  double sum = 0.0;
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    const auto z = logits.row(b);
    const auto t = targets.row(b);
    const double m = *std::max_element(z.begin(), z.end());
    double se = 0.0;
    for (double v : z) se += std::exp(v - m);
    const double lse = m + std::log(se);
    auto g = res.grad.row(b);
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (t[k] != 0.0) sum -= t[k] * (z[k] - lse);
      g[k] = (std::exp(z[k] - lse) - t[k]) / batch;
    }
  }
  res.loss = sum / batch;
  return res;
}

namespace {

// dW and the bias accumulate over samples, dx over outputs, each in
// increasing order.
void dense_backward(const LayerParams& p, const Matrix& x, const Matrix& g, LayerParams& grad,
                    Matrix* gx) {
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto grow = g.row(b);
    for (std::size_t o = 0; o < grow.size(); ++o) grad.bias[o] += grow[o];
  }
  gemm_accumulate(transpose(g), x, grad.weights);
  if (gx != nullptr) gemm_accumulate(g, p.weights, *gx);
}

void conv_backward(const ConvLayer& c, const LayerParams& p, const Shape3& in, const Shape3& out,
                   const Matrix& x, const Matrix& g, LayerParams& grad, Matrix* gx) {
  const std::size_t plane_in = in.height * in.width;
  const std::size_t plane_out = out.height * out.width;
  const Matrix wt = gx != nullptr ? transpose(p.weights) : Matrix();
  Matrix gplanes(c.filters, plane_out);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const auto grow = g.row(b);
    std::copy(grow.begin(), grow.end(), gplanes.data().begin());
    for (std::size_t f = 0; f < c.filters; ++f) {
      double bsum = 0.0;
      for (double v : gplanes.row(f)) bsum += v;
      grad.bias[f] += bsum;
    }
    const Matrix cols = im2col(c, in, out, x.row(b).data());
    gemm_accumulate(gplanes, transpose(cols), grad.weights);
    if (gx == nullptr) continue;
    Matrix gcols(cols.rows(), cols.cols());
    gemm_accumulate(wt, gplanes, gcols);
    // Scatter the patch gradients back onto the input (col2im).
    double* gxs = gx->row(b).data();
    std::size_t r = 0;
    for (std::size_t ch = 0; ch < c.in_channels; ++ch)
      for (std::size_t k = 0; k < c.kernel_h; ++k)
        for (std::size_t m = 0; m < c.kernel_w; ++m, ++r) {
          const double* src = gcols.row(r).data();
          for (std::size_t i = 0; i < out.height; ++i) {
            double* dst = gxs + ch * plane_in + (i + k) * in.width + m;
            const double* gr = src + i * out.width;
            for (std::size_t j = 0; j < out.width; ++j) dst[j] += gr[j];
          }
        }
  }
}

void activation_backward(Activation fn, const Matrix& x, const Matrix& y, const Matrix& g,
                         Matrix& gx) {
  switch (fn) {
    case Activation::sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = y.data()[i];
        gx.data()[i] = g.data()[i] * s * (1.0 - s);
      }
      break;
    case Activation::leaky_relu:
      for (std::size_t i = 0; i < x.size(); ++i)
        gx.data()[i] = x.data()[i] > 0.0 ? g.data()[i] : kLeakySlope * g.data()[i];
      break;
    case Activation::softmax:
      for (std::size_t b = 0; b < x.rows(); ++b) {
        const auto s = y.row(b);
        const auto gr = g.row(b);
        double dot = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) dot += gr[k] * s[k];
        auto out = gx.row(b);
        for (std::size_t k = 0; k < s.size(); ++k) out[k] = s[k] * (gr[k] - dot);
      }
      break;
  }
}

}  // namespace

Parameters backward(const NetworkSpec& spec, const Parameters& params, const ForwardCache& cache,
                    const LossGradient& upstream) {
  const std::size_t n = spec.layers.size();
  if (cache.values.size() != n + 1 || cache.shapes.size() != n + 1 || upstream.layer > n) {
    throw DimensionError("forward cache does not match the network spec");
  }
  const Matrix& at = cache.values[upstream.layer];
  if (upstream.grad.rows() != at.rows() || upstream.grad.cols() != at.cols()) {
    throw DimensionError("upstream gradient does not match the cached activations");
  }
  check_params(spec, params);

  Parameters grads = zero_params(spec);
  Matrix g = upstream.grad;
  for (std::size_t i = upstream.layer; i-- > 0;) {
    const Matrix& x = cache.values[i];
    const bool need_input = i > 0;
    Matrix gx = need_input ? Matrix(x.rows(), x.cols()) : Matrix();
    const Layer& layer = spec.layers[i];
    if (std::holds_alternative<DenseLayer>(layer)) {
      dense_backward(params[i], x, g, grads[i], need_input ? &gx : nullptr);
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      conv_backward(*c, params[i], cache.shapes[i], cache.shapes[i + 1], x, g, grads[i],
                    need_input ? &gx : nullptr);
    } else if (!need_input) {
      break;
    } else if (std::holds_alternative<MaxPool2Layer>(layer)) {
      const std::size_t per = cache.shapes[i + 1].size();
      const auto& am = cache.pool_argmax[i];
      for (std::size_t b = 0; b < x.rows(); ++b) {
        auto gxrow = gx.row(b);
        const auto grow = g.row(b);
        for (std::size_t o = 0; o < per; ++o) gxrow[am[b * per + o]] += grow[o];
      }
    } else {
      activation_backward(std::get<ActivationLayer>(layer).fn, x, cache.values[i + 1], g, gx);
    }
    g = std::move(gx);
  }
  return grads;
}

EntropyTerms entropy_terms(const NetworkSpec& spec, const Parameters& params,
                           const std::set<std::size_t>& layers) {
  check_params(spec, params);
  const auto ordinals = weight_layer_ordinals(spec);
  const std::size_t count = ordinals.empty() ? 0 : *std::max_element(ordinals.begin(), ordinals.end());
  for (std::size_t l : layers) {
    if (l == 0 || l > count) {
      throw ConfigError(fmt::format("entropy-loss layer {} not in 1..{}", l, count));
    }
  }
  EntropyTerms terms;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (ordinals[i] == 0 || !layers.contains(ordinals[i])) continue;
    if (std::holds_alternative<DenseLayer>(spec.layers[i])) {
      terms.dense.push_back({ordinals[i], params[i].weights});
      terms.dense_layer_pos.push_back(i);
    } else {
      const auto& c = std::get<ConvLayer>(spec.layers[i]);
      const std::size_t area = c.kernel_h * c.kernel_w;
      for (std::size_t f = 0; f < c.filters; ++f) {
        for (std::size_t ch = 0; ch < c.in_channels; ++ch) {
          const auto row = params[i].weights.row(f).subspan(ch * area, area);
          terms.conv.push_back({{ordinals[i], f, ch},
                                Matrix(c.kernel_h, c.kernel_w,
                                       std::vector<double>(row.begin(), row.end()))});
          terms.conv_layer_pos.push_back(i);
        }
      }
    }
  }
  return terms;
}

double entropy_loss(const NetworkSpec& spec, const Parameters& params,
                    const EntropyRegularizer& reg) {
  if (reg.layers.empty()) return 0.0;
  const EntropyTerms t = entropy_terms(spec, params, reg.layers);
  return dense_entropy_loss(t.dense, reg.schedule, reg.form) +
         conv_entropy_loss(t.conv, reg.schedule, reg.form);
}

void add_entropy_gradients(const NetworkSpec& spec, const Parameters& params,
                           const EntropyRegularizer& reg, Parameters& grads) {
  if (reg.layers.empty()) return;
  const EntropyTerms t = entropy_terms(spec, params, reg.layers);
  const auto dense = dense_entropy_loss_grad(t.dense, reg.schedule, reg.form);
  for (std::size_t i = 0; i < dense.size(); ++i) {
    auto dst = grads[t.dense_layer_pos[i]].weights.data();
    const auto src = dense[i].data();
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
  }
  const auto conv = conv_entropy_loss_grad(t.conv, reg.schedule, reg.form);
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const SliceKey& key = t.conv[i].key;
    const std::size_t area = conv[i].size();
    auto dst = grads[t.conv_layer_pos[i]].weights.row(key.filter).subspan(key.channel * area, area);
    const auto src = conv[i].data();
    for (std::size_t k = 0; k < area; ++k) dst[k] += src[k];
  }
}

CompoundEvaluation evaluate_compound(const NetworkSpec& spec, const Parameters& params,
                                     const Matrix& batch, const Shape3& input_shape,
                                     const Matrix& targets, BaseLoss kind,
                                     const EntropyRegularizer& reg) {
  CompoundEvaluation ev;
  ev.cache = forward(spec, params, batch, input_shape);
  const LossGradient up = base_loss(spec, ev.cache, targets, kind);
  ev.base = up.loss;
  ev.grads = backward(spec, params, ev.cache, up);
  ev.entropy = entropy_loss(spec, params, reg);
  add_entropy_gradients(spec, params, reg, ev.grads);
  return ev;
}

}  // namespace entprop
