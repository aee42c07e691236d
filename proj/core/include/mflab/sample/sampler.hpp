#pragma once

#include <functional>
#include <vector>

#include "mflab/net/velocity_net.hpp"
#include "mflab/num/rng.hpp"

namespace mflab::sample {

using num::Tensor;

/// Output of an n-step sampler on the grid 1 = t_0 > t_1 > ... > t_n = 0.
struct SampleRun {
  std::size_t steps = 0;
  std::vector<double> grid;
  Tensor samples;
  // States at every grid time (steps + 1 entries) when recording was requested.
  std::vector<Tensor> intermediates;
};

std::vector<double> uniform_grid(std::size_t steps);

using VelocityFn = std::function<Tensor(const Tensor& z, double t)>;
using FlowMapFn = std::function<Tensor(const Tensor& z, double t, double r)>;

// z_{i+1} = z_i + (t_{i+1} - t_i) v(z_i, t_i)
SampleRun euler_integrate(const VelocityFn& velocity, Tensor z1, std::size_t steps, bool record = false);
// z_{i+1} = z_i + (t_{i+1} - t_i) u(z_i, t_i, t_{i+1})
SampleRun flow_map_integrate(const FlowMapFn& u, Tensor z1, std::size_t steps, bool record = false);

/// n-step MeanFlow sampling from z_1 ~ N(0, I). psi is one row (shared) or N rows.
/// The initial noise depends only on the rng, so different step counts start
/// from identical states.
SampleRun meanflow_sample(const net::VelocityNet& net, const Tensor& psi, std::size_t steps, num::Rng& rng,
                          std::size_t n, bool record = false);

/// Euler integration of forward_v on the same grid and with the same noise.
SampleRun fm_euler_sample(const net::VelocityNet& net, const Tensor& psi, std::size_t steps, num::Rng& rng,
                          std::size_t n, bool record = false);

}  // namespace mflab::sample
