#include <benchmark/benchmark.h>

#include <array>
#include <random>

#include "entprop/network.hpp"
#include "entprop/optim.hpp"
#include "entprop/trainer.hpp"

namespace {

using namespace entprop;

// One minibatch of forward, compound-loss backward and Adam update.
void train_step(benchmark::State& state, const NetworkSpec& spec, const Shape3& input,
                std::size_t outputs, BaseLoss kind, const EntropyRegularizer& reg) {
  constexpr std::size_t kBatch = 128;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(kBatch, input.size());
  for (double& v : x.data()) v = u(rng);
  Matrix t(kBatch, outputs);
  if (kind == BaseLoss::mse) {
    t = x;
  } else {
    for (std::size_t b = 0; b < kBatch; ++b) t(b, b % outputs) = 1.0;
  }
  Parameters params = glorot_init(spec, 1);
  AdamState adam = adam_init(params);
  const AdamConfig cfg;
  for (auto _ : state) {
    const CompoundEvaluation e = evaluate_compound(spec, params, x, input, t, kind, reg);
    adam_step(params, e.grads, adam, cfg);
    benchmark::DoNotOptimize(e.base);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBatch));
}

EntropyRegularizer layer_one(double lambda, bool conv) {
  EntropyRegularizer reg;
  (conv ? reg.schedule.conv_default : reg.schedule.dense_default) = lambda;
  reg.form.kind = LossKind::reciprocal;
  reg.layers = {1};
  return reg;
}

void BM_AutoencoderStep(benchmark::State& state) {
  const auto latent = static_cast<std::size_t>(state.range(0));
  const Shape3 input{1, 28, 28};
  train_step(state, autoencoder_spec(input.size(), latent), input, input.size(), BaseLoss::mse,
             layer_one(state.range(1) ? 1e-2 : 0.0, false));
}
BENCHMARK(BM_AutoencoderStep)->Args({20, 0})->Args({180, 0})->Args({180, 1})->Unit(benchmark::kMillisecond);

void BM_CnnStep(benchmark::State& state) {
  const Shape3 input{3, 32, 32};
  const std::array<std::size_t, 1> widths{static_cast<std::size_t>(state.range(0))};
  train_step(state, cnn_spec(input, widths), input, 10, BaseLoss::cross_entropy,
             layer_one(state.range(1) ? 1e-2 : 0.0, true));
}
BENCHMARK(BM_CnnStep)->Args({32, 0})->Args({32, 1})->Unit(benchmark::kMillisecond);

}  // namespace
