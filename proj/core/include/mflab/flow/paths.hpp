#pragma once

#include "mflab/num/tensor.hpp"

namespace mflab::flow {

using num::Tensor;

// Linear path z_t = (1 - t) x + t eps; t = 0 is data, t = 1 is noise.
Tensor interpolate(const Tensor& x, const Tensor& eps, double t);
// Row-wise times from a (B x 1) column.
Tensor interpolate(const Tensor& x, const Tensor& eps, const Tensor& t);

// Conditional velocity of the linear path, d z_t / dt = eps - x.
Tensor cond_velocity(const Tensor& x, const Tensor& eps);

}  // namespace mflab::flow
