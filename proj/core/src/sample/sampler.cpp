#include "mflab/sample/sampler.hpp"

namespace mflab::sample {

std::vector<double> uniform_grid(std::size_t steps) {
  if (steps == 0) throw ValidationError("sampler needs at least one step");
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    grid[i] = 1.0 - static_cast<double>(i) / static_cast<double>(steps);
  grid.front() = 1.0;
  grid.back() = 0.0;
  return grid;
}

namespace {

template <class Step>
SampleRun integrate(Tensor z, std::size_t steps, bool record, Step&& step) {
  SampleRun run;
  run.steps = steps;
  run.grid = uniform_grid(steps);
  if (record) run.intermediates.push_back(z);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = run.grid[i], r = run.grid[i + 1];
    const Tensor u = step(z, t, r);
    num::require_same_shape("sampler update", z, u);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += (r - t) * u[j];
    z.check_finite("sampler state at t=" + std::to_string(r));
    if (record) run.intermediates.push_back(z);
  }
  run.samples = std::move(z);
  return run;
}

Tensor initial_noise(const net::VelocityNet& net, num::Rng& rng, std::size_t n) {
  if (n == 0) throw ValidationError("sampler needs N >= 1");
  return rng.normal_tensor({n, net.dims().data_dim});
}

}  // namespace

SampleRun euler_integrate(const VelocityFn& velocity, Tensor z1, std::size_t steps, bool record) {
  return integrate(std::move(z1), steps, record, [&](const Tensor& z, double t, double) { return velocity(z, t); });
}

SampleRun flow_map_integrate(const FlowMapFn& u, Tensor z1, std::size_t steps, bool record) {
  return integrate(std::move(z1), steps, record, u);
}

SampleRun meanflow_sample(const net::VelocityNet& net, const Tensor& psi, std::size_t steps, num::Rng& rng,
                          std::size_t n, bool record) {
  return flow_map_integrate([&](const Tensor& z, double t, double r) { return net.forward_u(z, t, r, psi); },
                            initial_noise(net, rng, n), steps, record);
}

SampleRun fm_euler_sample(const net::VelocityNet& net, const Tensor& psi, std::size_t steps, num::Rng& rng,
                          std::size_t n, bool record) {
  return euler_integrate([&](const Tensor& z, double t) { return net.forward_v(z, t, psi); },
                         initial_noise(net, rng, n), steps, record);
}

}  // namespace mflab::sample
