#pragma once

#include <cstdint>

#include "mflab/num/params.hpp"

namespace mflab::num {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ParamSet m;
  ParamSet v;
  std::int64_t step = 0;
};

// One bias-corrected Adam update applied in place to `params`.
void adam_step(ParamSet& params, const Gradients& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace mflab::num
