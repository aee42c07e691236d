#pragma once

#include <concepts>
#include <vector>

#include "mflab/flow/paths.hpp"
#include "mflab/net/velocity_net.hpp"
#include "mflab/num/dual.hpp"
#include "mflab/num/params.hpp"

namespace mflab::flow {

/// Anything that evaluates u(z, t, r, psi) both plainly and on dual numbers.
template <class M>
concept FlowMap = requires(const M& m, const Tensor& x, const num::DualTensor& d) {
  { m.forward_u(x, x, x, x) } -> std::convertible_to<Tensor>;
  { m.u_dual(d, d, d, d) } -> std::convertible_to<num::DualTensor>;
};

/// Total derivative d/dt u(z_t, t, r, psi) along the trajectory, i.e. the JVP
/// with tangent (v, 1, 0, 0). psi must have one row per batch entry.
template <FlowMap M>
Tensor total_derivative(const M& model, const Tensor& z, const Tensor& t, const Tensor& r, const Tensor& psi,
                        const Tensor& v) {
  const Tensor inputs[] = {z, t, r, psi};
  const Tensor tangents[] = {v, Tensor(t.shape(), 1.0), Tensor::zeros_like(r), Tensor::zeros_like(psi)};
  auto f = [&model](std::span<const num::DualTensor> in) { return model.u_dual(in[0], in[1], in[2], in[3]); };
  return num::jvp(f, inputs, tangents).second;
}

/// MeanFlow regression target u_tgt = v + (r - t) d/dt u, returned as a plain
/// tensor so it enters the loss as a constant (stop-gradient). Rows with t = r
/// skip the JVP and return v exactly.
template <FlowMap M>
Tensor meanflow_target(const M& model, const Tensor& z, const Tensor& t, const Tensor& r, const Tensor& psi,
                       const Tensor& v) {
  num::require_same_shape("meanflow_target", z, v);
  if (t.rows() != z.rows() || r.rows() != z.rows() || psi.rows() != z.rows())
    throw ShapeError("meanflow_target: batch sizes of z, t, r and psi differ");
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    if (t[i] < r[i]) throw ValidationError("meanflow_target: time convention violated, need t >= r");
    if (t[i] != r[i]) active.push_back(i);
  }
  Tensor target = v;
  if (active.empty()) return target;

  auto gather = [&active](const Tensor& src) {
    Tensor out({active.size(), src.cols()});
    for (std::size_t k = 0; k < active.size(); ++k) {
      auto s = src.row_span(active[k]);
      std::copy(s.begin(), s.end(), out.row_span(k).begin());
    }
    return out;
  };
  const Tensor tz = gather(t), rz = gather(r), vz = gather(v);
  const Tensor dudt = total_derivative(model, gather(z), tz, rz, gather(psi), vz);
  dudt.check_finite("meanflow_target: total derivative");
  for (std::size_t k = 0; k < active.size(); ++k) {
    const double gap = rz[k] - tz[k];
    auto dst = target.row_span(active[k]);
    auto d = dudt.row_span(k);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += gap * d[j];
  }
  return target;
}

/// One MeanFlow minibatch. z_t is formed row-wise from (x, eps, t).
struct TrainBatch {
  Tensor x;
  Tensor eps;
  Tensor psi;  // B x cond_dim
  Tensor t;    // B x 1
  Tensor r;    // B x 1
};

/// Where the bootstrap velocity v in the target comes from.
struct VelocitySource {
  enum class Kind { conditional, pretrained };
  Kind kind = Kind::conditional;
  const net::VelocityNet* teacher = nullptr;

  static VelocitySource conditional() { return {}; }
  static VelocitySource pretrained(const net::VelocityNet& teacher) { return {Kind::pretrained, &teacher}; }
};

struct LossResult {
  double loss = 0.0;
  num::Gradients grads;
};

Tensor bootstrap_velocity(const VelocitySource& source, const TrainBatch& batch, const Tensor& z_t);

/// Mean over the batch of ||u(z_t, t, r, psi) - sg(u_tgt)||^2.
double meanflow_loss(const net::VelocityNet& net, const TrainBatch& batch, const VelocitySource& source);
LossResult meanflow_loss_grad(const net::VelocityNet& net, const TrainBatch& batch, const VelocitySource& source);

/// Flow-matching loss: mean over the batch of ||v(z_t, t, psi) - v||^2.
double fm_loss(const net::VelocityNet& net, const Tensor& z_t, const Tensor& t, const Tensor& psi, const Tensor& v);
LossResult fm_loss_grad(const net::VelocityNet& net, const Tensor& z_t, const Tensor& t, const Tensor& psi,
                        const Tensor& v);

// Regression of the net's u at (z, t, r, psi) onto a fixed target, with gradients.
LossResult regression_loss_grad(const net::VelocityNet& net, const Tensor& z, const Tensor& t, const Tensor& r,
                                const Tensor& psi, const Tensor& target);

}  // namespace mflab::flow
