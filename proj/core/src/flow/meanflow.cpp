#include "mflab/flow/meanflow.hpp"

#include "mflab/num/tape.hpp"

namespace mflab::flow {

Tensor bootstrap_velocity(const VelocitySource& source, const TrainBatch& batch, const Tensor& z_t) {
  if (source.kind == VelocitySource::Kind::conditional) return cond_velocity(batch.x, batch.eps);
  if (source.teacher == nullptr) throw ValidationError("pretrained velocity source has no teacher network");
  return source.teacher->forward_v(z_t, batch.t, batch.psi);
}

LossResult regression_loss_grad(const net::VelocityNet& net, const Tensor& z, const Tensor& t, const Tensor& r,
                                const Tensor& psi, const Tensor& target) {
  num::Tape tape;
  const num::Var u = net.u_tape(tape, tape.constant(z), tape.constant(t), tape.constant(r), tape.constant(psi));
  const num::Var diff = sub(u, tape.constant(target));
  const num::Var loss = mul_scalar(sum_sq(diff), 1.0 / static_cast<double>(z.rows()));
  LossResult out;
  out.loss = loss.value().item();
  loss.value().check_finite("loss");
  out.grads = tape.backward(loss);
  num::check_finite(out.grads, "gradient");
  return out;
}

namespace {

Tensor meanflow_target_for(const net::VelocityNet& net, const TrainBatch& batch, const VelocitySource& source,
                           const Tensor& z_t) {
  const Tensor v = bootstrap_velocity(source, batch, z_t);
  v.check_finite("bootstrap velocity");
  return meanflow_target(net, z_t, batch.t, batch.r, batch.psi, v);
}

double mean_sq_rows(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / static_cast<double>(a.rows());
}

}  // namespace

double meanflow_loss(const net::VelocityNet& net, const TrainBatch& batch, const VelocitySource& source) {
  const Tensor z_t = interpolate(batch.x, batch.eps, batch.t);
  const Tensor target = meanflow_target_for(net, batch, source, z_t);
  const double loss = mean_sq_rows(net.forward_u(z_t, batch.t, batch.r, batch.psi), target);
  if (!std::isfinite(loss)) throw NumericError("meanflow_loss is not finite");
  return loss;
}

LossResult meanflow_loss_grad(const net::VelocityNet& net, const TrainBatch& batch, const VelocitySource& source) {
  const Tensor z_t = interpolate(batch.x, batch.eps, batch.t);
  const Tensor target = meanflow_target_for(net, batch, source, z_t);
  return regression_loss_grad(net, z_t, batch.t, batch.r, batch.psi, target);
}

double fm_loss(const net::VelocityNet& net, const Tensor& z_t, const Tensor& t, const Tensor& psi, const Tensor& v) {
  const double loss = mean_sq_rows(net.forward_v(z_t, t, psi), v);
  if (!std::isfinite(loss)) throw NumericError("fm_loss is not finite");
  return loss;
}

LossResult fm_loss_grad(const net::VelocityNet& net, const Tensor& z_t, const Tensor& t, const Tensor& psi,
                        const Tensor& v) {
  return regression_loss_grad(net, z_t, t, t, psi, v);
}

}  // namespace mflab::flow
