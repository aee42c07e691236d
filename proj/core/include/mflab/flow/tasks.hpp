#pragma once

#include <string>
#include <vector>

#include "mflab/conditions.hpp"
#include "mflab/num/rng.hpp"
#include "mflab/num/tensor.hpp"

namespace mflab::flow {

using num::Tensor;

/// Isotropic Gaussian data N(mean, std^2 I). Under the linear path every
/// marginal p_t is Gaussian, which makes the velocity field and its flow
/// available in closed form.
struct GaussianTask {
  std::vector<double> mean;
  double std = 1.0;

  void validate() const;
  std::size_t dim() const { return mean.size(); }
  Tensor sample(std::size_t n, num::Rng& rng) const;
  // Standard deviation of the marginal at time t: sqrt((1-t)^2 std^2 + t^2).
  double marginal_std(double t) const;
};

/// E[eps - x | z_t = z] for each row of z. With s_t the marginal std,
///   v(z, t) = -mean + (t - (1-t) std^2) / s_t^2 * (z - (1-t) mean).
/// s_t > 0 on all of [0, 1], so t = 1 needs no special case.
Tensor analytic_marginal_velocity(const GaussianTask& task, const Tensor& z, double t);

/// Exact ODE transport from time t to time r:
///   z_r = (1-r) mean + s_r / s_t (z_t - (1-t) mean).
Tensor gaussian_ode_flow(const GaussianTask& task, const Tensor& z_t, double t, double r);

/// (z_r - z_t) / (r - t), with z_r from fixed-step RK4 integration of the
/// analytic marginal velocity (step <= max_step). Requires t > r.
Tensor analytic_average_velocity(const GaussianTask& task, const Tensor& z_t, double t, double r,
                                 double max_step = 1e-3);

/// Mixture with one Gaussian component per attribute tuple. Attribute i sets
/// coordinate i of the component mean on an evenly spaced, centred ladder.
struct CompositionalMixture {
  std::size_t n_attributes = 2;
  std::size_t values_per_attribute = 2;
  std::size_t data_dim = 2;
  double spacing = 3.0;
  double component_std = 0.35;

  void validate() const;
  std::size_t num_components() const;
  std::vector<ConditionTuple> conditions() const;
  std::vector<std::string> condition_ids() const;
  std::vector<double> component_mean(const ConditionTuple& tuple) const;
  // Index of a tuple in conditions(); throws ValidationError if out of range.
  std::size_t component_index(const ConditionTuple& tuple) const;
  Tensor sample_component(const ConditionTuple& tuple, std::size_t n, num::Rng& rng) const;
};

}  // namespace mflab::flow
