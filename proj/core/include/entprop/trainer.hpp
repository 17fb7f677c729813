#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "entprop/datasets.hpp"
#include "entprop/network.hpp"
#include "entprop/optim.hpp"

namespace entprop {

inline constexpr std::size_t kDefaultBatchSize = 128;
inline constexpr std::size_t kDefaultPatience = 7;
inline constexpr double kMseMinDelta = 1e-5;
inline constexpr double kAccuracyMinDelta = 0.0;

struct TrainConfig {
  BaseLoss base_loss = BaseLoss::mse;
  EntropyRegularizer entropy;
  AdamConfig adam;
  std::size_t batch_size = kDefaultBatchSize;
  std::size_t max_epochs = 100;
  std::size_t patience = kDefaultPatience;
  double min_delta = kMseMinDelta;
  std::uint64_t seed = 0;
  std::size_t replications = 1;  // consumed by sweeps, not by a single run
};

/// Throws ConfigError unless patience, batch size and max epochs are >= 1
/// and the learning rate is positive.
void validate(const TrainConfig& cfg);

struct RunResult {
  std::vector<double> train_loss;    // compound loss, mean over the epoch's batches
  std::vector<double> train_metric;  // MSE or accuracy over the epoch's batches
  std::vector<double> val_metric;    // MSE or accuracy on the validation set after the epoch
  std::size_t stopping_epoch = 0;    // == val_metric.size()
  NetworkSpec spec;
  Parameters final_params;
  Shape3 input_shape;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

/// dense(in -> latent), sigmoid, dense(latent -> in).
NetworkSpec autoencoder_spec(std::size_t input_size, std::size_t latent);

/// One block per width: 3x3 conv, leaky ReLU, 2x2 max pool; then a dense
/// softmax head over `classes`.
NetworkSpec cnn_spec(const Shape3& input, std::span<const std::size_t> widths,
                     std::size_t classes = 10);

/// Generic loop: seeded init, per-epoch seeded shuffle, Adam on the compound
/// loss, validation after every epoch, early stop on the validation metric
/// (minimized for MSE, maximized for accuracy).
RunResult train_network(const NetworkSpec& spec, const TrainConfig& cfg, const Dataset& train,
                        const Dataset& val);

/// Reconstruction with MSE on flattened images; entropy settings come from cfg.
RunResult train_autoencoder(std::size_t latent, const TrainConfig& cfg, const Dataset& train,
                            const Dataset& val);

/// Classification with cross-entropy on image tensors.
RunResult train_cnn(std::span<const std::size_t> widths, const TrainConfig& cfg,
                    const Dataset& train, const Dataset& val);

/// Mean squared reconstruction error of a network whose output has the input's size.
double evaluate_mse(const NetworkSpec& spec, const Parameters& params, const Dataset& data);
/// Fraction of samples whose arg-max output equals the label.
double evaluate_accuracy(const NetworkSpec& spec, const Parameters& params, const Dataset& data);

/// Mean |c11| over every (filter, channel) slice of the conv layer with the
/// given 1-based weight-layer ordinal.
double mean_abs_c11(const NetworkSpec& spec, const Parameters& params, std::size_t ordinal);

}  // namespace entprop
