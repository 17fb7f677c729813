#include "entprop/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/core.h>

#include "entprop/errors.hpp"

namespace entprop {

namespace {

constexpr std::size_t kEvalBatch = 256;
// Offsets the shuffle stream from the initializer stream for the same seed.
constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

void fill_batch(const Dataset& data, std::span<const std::size_t> idx, bool one_hot_targets,
                std::size_t classes, Matrix& x, Matrix& t) {
  const std::size_t n = data.shape.size();
  x = Matrix(idx.size(), n);
  for (std::size_t b = 0; b < idx.size(); ++b) data.copy_image(idx[b], x.row(b));
  if (one_hot_targets) {
    t = Matrix(idx.size(), classes);
    for (std::size_t b = 0; b < idx.size(); ++b) t(b, data.labels[idx[b]]) = 1.0;
  } else {
    t = x;
  }
}

std::size_t argmax_row(std::span<const double> r) {
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

std::size_t count_correct(const Matrix& out, const Dataset& data, std::span<const std::size_t> idx) {
  std::size_t hits = 0;
  for (std::size_t b = 0; b < idx.size(); ++b) hits += argmax_row(out.row(b)) == data.labels[idx[b]];
  return hits;
}

std::size_t output_classes(const NetworkSpec& spec, const Shape3& input) {
  return infer_shapes(spec, input).back().size();
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.patience < 1) throw ConfigError("patience must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (cfg.max_epochs < 1) throw ConfigError("max epochs must be >= 1");
  if (!(cfg.adam.lr > 0.0)) throw ConfigError(fmt::format("learning rate {} must be positive", cfg.adam.lr));
  if (!(cfg.min_delta >= 0.0)) throw ConfigError("min_delta must be >= 0");
}

NetworkSpec autoencoder_spec(std::size_t input_size, std::size_t latent) {
  if (latent < 1) throw ConfigError("latent dimension must be >= 1");
  if (input_size < 1) throw DimensionError("autoencoder input size must be >= 1");
  return {{DenseLayer{input_size, latent}, ActivationLayer{Activation::sigmoid},
           DenseLayer{latent, input_size}}};
}

NetworkSpec cnn_spec(const Shape3& input, std::span<const std::size_t> widths, std::size_t classes) {
  if (widths.empty()) throw ConfigError("cnn needs at least one block width");
  NetworkSpec spec;
  std::size_t channels = input.channels;
  for (std::size_t w : widths) {
    if (w < 1) throw ConfigError("cnn block width must be >= 1");
    spec.layers.emplace_back(ConvLayer{w, 3, 3, channels});
    spec.layers.emplace_back(ActivationLayer{Activation::leaky_relu});
    spec.layers.emplace_back(MaxPool2Layer{});
    channels = w;
  }
  // Infer the flattened size after the blocks; throws on incompatible input.
  const std::size_t flat = infer_shapes(spec, input).back().size();
  spec.layers.emplace_back(DenseLayer{flat, classes});
  spec.layers.emplace_back(ActivationLayer{Activation::softmax});
  return spec;
}

double evaluate_mse(const NetworkSpec& spec, const Parameters& params, const Dataset& data) {
  if (data.size() == 0) throw ConfigError("cannot evaluate on an empty dataset");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  double sum = 0.0;
  Matrix x, t;
  for (std::size_t start = 0; start < idx.size(); start += kEvalBatch) {
    const auto chunk = std::span(idx).subspan(start, std::min(kEvalBatch, idx.size() - start));
    fill_batch(data, chunk, false, 0, x, t);
    const ForwardCache cache = forward(spec, params, x, data.shape);
    const Matrix& y = cache.output();
    if (y.cols() != x.cols()) throw DimensionError("reconstruction size differs from input size");
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y.data()[i] - x.data()[i];
      sum += d * d;
    }
  }
  return sum / static_cast<double>(data.size() * data.shape.size());
}

double evaluate_accuracy(const NetworkSpec& spec, const Parameters& params, const Dataset& data) {
  if (data.size() == 0) throw ConfigError("cannot evaluate on an empty dataset");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::size_t hits = 0;
  Matrix x, t;
  for (std::size_t start = 0; start < idx.size(); start += kEvalBatch) {
    const auto chunk = std::span(idx).subspan(start, std::min(kEvalBatch, idx.size() - start));
    fill_batch(data, chunk, false, 0, x, t);
    hits += count_correct(forward(spec, params, x, data.shape).output(), data, chunk);
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

RunResult train_network(const NetworkSpec& spec, const TrainConfig& cfg, const Dataset& train,
                        const Dataset& val) {
  validate(cfg);
  if (train.size() == 0 || val.size() == 0) throw ConfigError("training and validation sets must be nonempty");
  if (train.shape != val.shape) throw DimensionError("training and validation image shapes differ");
  const auto start_time = std::chrono::steady_clock::now();

  const bool classify = cfg.base_loss == BaseLoss::cross_entropy;
  const std::size_t classes = output_classes(spec, train.shape);
  const Direction direction = classify ? Direction::maximize : Direction::minimize;

  RunResult res;
  res.spec = spec;
  res.input_shape = train.shape;
  res.seed = cfg.seed;
  Parameters params = glorot_init(spec, cfg.seed);
  AdamState adam = adam_init(params);
  std::mt19937_64 shuffle_rng(cfg.seed ^ kShuffleStream);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Matrix x, t;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    double metric_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const auto chunk = std::span(order).subspan(start, std::min(cfg.batch_size, order.size() - start));
      fill_batch(train, chunk, classify, classes, x, t);
      const CompoundEvaluation ev =
          evaluate_compound(spec, params, x, train.shape, t, cfg.base_loss, cfg.entropy);
      const double weight = static_cast<double>(chunk.size());
      loss_sum += (ev.base + ev.entropy) * weight;
      metric_sum += classify ? static_cast<double>(count_correct(ev.cache.output(), train, chunk))
                             : ev.base * weight;
      adam_step(params, ev.grads, adam, cfg.adam);
    }
    const double n = static_cast<double>(order.size());
    res.train_loss.push_back(loss_sum / n);
    res.train_metric.push_back(metric_sum / n);
    res.val_metric.push_back(classify ? evaluate_accuracy(spec, params, val)
                                      : evaluate_mse(spec, params, val));
    if (early_stop_check(res.val_metric, cfg.patience, cfg.min_delta, direction) == StopDecision::stop) {
      break;
    }
  }
  res.stopping_epoch = res.val_metric.size();
  res.final_params = std::move(params);
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return res;
}

RunResult train_autoencoder(std::size_t latent, const TrainConfig& cfg, const Dataset& train,
                            const Dataset& val) {
  if (cfg.base_loss != BaseLoss::mse) throw ConfigError("the autoencoder trains on MSE");
  return train_network(autoencoder_spec(train.shape.size(), latent), cfg, train, val);
}

RunResult train_cnn(std::span<const std::size_t> widths, const TrainConfig& cfg,
                    const Dataset& train, const Dataset& val) {
  if (cfg.base_loss != BaseLoss::cross_entropy) throw ConfigError("the classifier trains on cross-entropy");
  return train_network(cnn_spec(train.shape, widths), cfg, train, val);
}

double mean_abs_c11(const NetworkSpec& spec, const Parameters& params, std::size_t ordinal) {
  check_params(spec, params);
  const auto ordinals = weight_layer_ordinals(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (ordinals[i] != ordinal) continue;
    const auto* c = std::get_if<ConvLayer>(&spec.layers[i]);
    if (c == nullptr) throw ConfigError(fmt::format("weight layer {} is not a convolution", ordinal));
    const std::size_t area = c->kernel_h * c->kernel_w;
    double sum = 0.0;
    for (std::size_t f = 0; f < c->filters; ++f)
      for (std::size_t ch = 0; ch < c->in_channels; ++ch) sum += std::fabs(params[i].weights(f, ch * area));
    return sum / static_cast<double>(c->filters * c->in_channels);
  }
  throw ConfigError(fmt::format("no weight layer with ordinal {}", ordinal));
}

}  // namespace entprop
