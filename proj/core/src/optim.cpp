#include "entprop/optim.hpp"

#include <cmath>

#include "entprop/errors.hpp"

namespace entprop {

AdamState adam_init(const Parameters& params) {
  AdamState s;
  s.m.reserve(params.size());
  for (const auto& p : params) {
    s.m.push_back({Matrix(p.weights.rows(), p.weights.cols()), std::vector<double>(p.bias.size())});
  }
  s.v = s.m;
  return s;
}

namespace {

void update(std::span<double> p, std::span<const double> g, std::span<double> m,
            std::span<double> v, const AdamConfig& cfg, double c1, double c2) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

}  // namespace

void adam_step(Parameters& params, const Parameters& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw DimensionError("adam: parameter, gradient and state layer counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    for (const Parameters* other : {&grads, static_cast<const Parameters*>(&state.m), static_cast<const Parameters*>(&state.v)}) {
      const auto& o = (*other)[i];
      if (o.weights.rows() != p.weights.rows() || o.weights.cols() != p.weights.cols() ||
          o.bias.size() != p.bias.size()) {
        throw DimensionError("adam: shape mismatch between parameters and gradients/state");
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i].weights.data(), grads[i].weights.data(), state.m[i].weights.data(),
           state.v[i].weights.data(), cfg, c1, c2);
    update(params[i].bias, grads[i].bias, state.m[i].bias, state.v[i].bias, cfg, c1, c2);
  }
}

StopDecision early_stop_check(std::span<const double> trace, std::size_t patience,
                              double min_delta, Direction direction) {
  if (trace.empty()) return StopDecision::proceed;
  std::size_t best_at = 0;
  double best = trace[0];
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double gain = direction == Direction::minimize ? best - trace[i] : trace[i] - best;
    if (gain >= min_delta && gain > 0.0) {
      best = trace[i];
      best_at = i;
    }
  }
  const std::size_t plateau = trace.size() - best_at;  // includes the epoch that set it
  const bool any_flat = trace.size() - 1 > best_at;
  return plateau >= patience && any_flat ? StopDecision::stop : StopDecision::proceed;
}

}  // namespace entprop
