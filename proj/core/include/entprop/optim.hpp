#pragma once

#include <cstddef>
#include <span>

#include "entprop/network_spec.hpp"

namespace entprop {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Parameters m;
  Parameters v;
  std::size_t step = 0;
};

/// Zero moments shaped like `params`.
AdamState adam_init(const Parameters& params);

/// One bias-corrected Adam update of every weight and bias.
void adam_step(Parameters& params, const Parameters& grads, AdamState& state,
               const AdamConfig& cfg);

enum class Direction { minimize, maximize };
enum class StopDecision { proceed, stop };

/// Early stopping on a validation trace (one value per completed epoch).
///
/// The best value is tracked epoch by epoch; it only moves when an epoch
/// beats it by at least `min_delta`. Training stops once the epoch that set
/// the best value plus the epochs after it span `patience` epochs, with at
/// least one non-improving epoch among them. With patience 7 this stops
/// after seven saturated epochs counting the one that set the plateau.
StopDecision early_stop_check(std::span<const double> trace, std::size_t patience,
                              double min_delta, Direction direction);

}  // namespace entprop
