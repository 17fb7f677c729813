#include <benchmark/benchmark.h>

#include <random>

#include "entprop/conv.hpp"
#include "entprop/entropy_analysis.hpp"
#include "entprop/linalg.hpp"
#include "entprop/tensor.hpp"

namespace {

entprop::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  entprop::Matrix m(r, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(entprop::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Gemm)->RangeMultiplier(2)->Range(32, 256);

void BM_LuLogAbsDet(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto m = random_matrix(n, n, 3);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 4.0;
  for (auto _ : state) benchmark::DoNotOptimize(entprop::lu_logabsdet(m));
}
BENCHMARK(BM_LuLogAbsDet)->RangeMultiplier(2)->Range(16, 256);

// Dense entropy delta of an autoencoder encoder layer (latent x 784).
void BM_DenseEntropyDelta(benchmark::State& state) {
  const auto latent = static_cast<std::size_t>(state.range(0));
  const auto w = random_matrix(latent, 784, 4);
  for (auto _ : state) benchmark::DoNotOptimize(entprop::dense_entropy_delta(w));
}
BENCHMARK(BM_DenseEntropyDelta)->Arg(20)->Arg(80)->Arg(180);

void BM_Conv2d(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(side, side, 5), c = random_matrix(3, 3, 6);
  for (auto _ : state) benchmark::DoNotOptimize(entprop::conv2d(x, c));
}
BENCHMARK(BM_Conv2d)->Arg(16)->Arg(32)->Arg(64);

void BM_BuildConvMatrix(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto c = random_matrix(3, 3, 7);
  for (auto _ : state) benchmark::DoNotOptimize(entprop::build_conv_matrix(c, side, side));
}
BENCHMARK(BM_BuildConvMatrix)->Arg(8)->Arg(16)->Arg(32);

}  // namespace
