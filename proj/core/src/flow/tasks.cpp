#include "mflab/flow/tasks.hpp"

#include <cmath>

namespace mflab::flow {

void GaussianTask::validate() const {
  if (mean.empty()) throw ValidationError("gaussian task needs a non-empty mean");
  if (!(std > 0.0)) throw ValidationError("gaussian task std must be positive");
}

Tensor GaussianTask::sample(std::size_t n, num::Rng& rng) const {
  validate();
  Tensor out({n, dim()});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim(); ++j) out.at(i, j) = mean[j] + std * rng.normal();
  return out;
}

double GaussianTask::marginal_std(double t) const {
  const double a = (1.0 - t) * std;
  return std::sqrt(a * a + t * t);
}

Tensor analytic_marginal_velocity(const GaussianTask& task, const Tensor& z, double t) {
  task.validate();
  if (z.cols() != task.dim()) throw ShapeError("analytic_marginal_velocity: z has wrong dimension");
  if (t < 0.0 || t > 1.0) throw ValidationError("analytic_marginal_velocity: t must lie in [0, 1]");
  const double s2 = task.marginal_std(t) * task.marginal_std(t);
  const double gain = (t - (1.0 - t) * task.std * task.std) / s2;
  Tensor v = z;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = v.row_span(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double centred = z.at(r, j) - (1.0 - t) * task.mean[j];
      row[j] = -task.mean[j] + gain * centred;
    }
  }
  return v;
}

Tensor gaussian_ode_flow(const GaussianTask& task, const Tensor& z_t, double t, double r) {
  task.validate();
  const double ratio = task.marginal_std(r) / task.marginal_std(t);
  Tensor out = z_t;
  for (std::size_t i = 0; i < z_t.rows(); ++i) {
    auto row = out.row_span(i);
    for (std::size_t j = 0; j < row.size(); ++j)
      row[j] = (1.0 - r) * task.mean[j] + ratio * (z_t.at(i, j) - (1.0 - t) * task.mean[j]);
  }
  return out;
}

Tensor analytic_average_velocity(const GaussianTask& task, const Tensor& z_t, double t, double r, double max_step) {
  if (!(t > r)) throw ValidationError("analytic_average_velocity: need t > r; use the instantaneous velocity at t = r");
  if (!(max_step > 0.0)) throw ValidationError("analytic_average_velocity: max_step must be positive");
  const auto n = static_cast<std::size_t>(std::ceil((t - r) / max_step));
  const double h = (r - t) / static_cast<double>(n);  // negative: integrate toward data
  Tensor z = z_t;
  auto axpy = [](const Tensor& base, double a, const Tensor& k) {
    Tensor out = base;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * k[i];
    return out;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double s = t + static_cast<double>(i) * h;
    const Tensor k1 = analytic_marginal_velocity(task, z, s);
    const Tensor k2 = analytic_marginal_velocity(task, axpy(z, 0.5 * h, k1), s + 0.5 * h);
    const Tensor k3 = analytic_marginal_velocity(task, axpy(z, 0.5 * h, k2), s + 0.5 * h);
    const Tensor k4 = analytic_marginal_velocity(task, axpy(z, h, k3), s + h);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  Tensor u = z;
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = (z[j] - z_t[j]) / (r - t);
  return u;
}

void CompositionalMixture::validate() const {
  if (n_attributes == 0 || values_per_attribute == 0) throw ValidationError("mixture needs attributes and values");
  if (data_dim < n_attributes) throw ValidationError("mixture data_dim must be at least n_attributes");
  if (!(spacing > 0.0) || !(component_std > 0.0)) throw ValidationError("mixture spacing and std must be positive");
}

std::size_t CompositionalMixture::num_components() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < n_attributes; ++i) n *= values_per_attribute;
  return n;
}

std::vector<ConditionTuple> CompositionalMixture::conditions() const {
  validate();
  return enumerate_conditions(n_attributes, values_per_attribute);
}

std::vector<std::string> CompositionalMixture::condition_ids() const {
  std::vector<std::string> ids;
  for (const auto& c : conditions()) ids.push_back(condition_id(c));
  return ids;
}

std::size_t CompositionalMixture::component_index(const ConditionTuple& tuple) const {
  if (tuple.size() != n_attributes) throw ValidationError("condition " + condition_id(tuple) + " has wrong arity");
  std::size_t idx = 0;
  for (int v : tuple) {
    if (v < 0 || static_cast<std::size_t>(v) >= values_per_attribute)
      throw ValidationError("unknown condition id " + condition_id(tuple));
    idx = idx * values_per_attribute + static_cast<std::size_t>(v);
  }
  return idx;
}

std::vector<double> CompositionalMixture::component_mean(const ConditionTuple& tuple) const {
  component_index(tuple);
  std::vector<double> m(data_dim, 0.0);
  const double centre = 0.5 * static_cast<double>(values_per_attribute - 1);
  for (std::size_t i = 0; i < n_attributes; ++i) m[i] = (static_cast<double>(tuple[i]) - centre) * spacing;
  return m;
}

Tensor CompositionalMixture::sample_component(const ConditionTuple& tuple, std::size_t n, num::Rng& rng) const {
  const auto m = component_mean(tuple);
  Tensor out({n, data_dim});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < data_dim; ++j) out.at(i, j) = m[j] + component_std * rng.normal();
  return out;
}

}  // namespace mflab::flow
