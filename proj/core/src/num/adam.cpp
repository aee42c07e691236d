#include "mflab/num/adam.hpp"

#include <cmath>

namespace mflab::num {

std::size_t parameter_count(const ParamSet& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.size();
  return n;
}

ParamSet zeros_like(const ParamSet& params) {
  ParamSet out;
  for (const auto& [name, t] : params) out.emplace(name, Tensor::zeros_like(t));
  return out;
}

void check_finite(const ParamSet& params, std::string_view context) {
  for (const auto& [name, t] : params) t.check_finite(std::string(context) + " [" + name + "]");
}

void adam_step(ParamSet& params, const Gradients& grads, AdamState& state, const AdamConfig& cfg) {
  if (state.m.empty()) {
    state.m = zeros_like(params);
    state.v = zeros_like(params);
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (auto& [name, p] : params) {
    auto g_it = grads.find(name);
    if (g_it == grads.end()) throw ValidationError("adam_step: missing gradient for parameter '" + name + "'");
    const Tensor& g = g_it->second;
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    require_same_shape("adam_step[" + name + "]", p, g);
    require_same_shape("adam_step[" + name + "]", p, m);
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace mflab::num
