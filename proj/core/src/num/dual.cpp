#include "mflab/num/dual.hpp"

#include <cmath>

#include "mflab/num/kernels.hpp"

namespace mflab::num {

DualTensor::DualTensor(Tensor value, Tensor tangent) : value_(std::move(value)), tangent_(std::move(tangent)) {
  require_same_shape("DualTensor", value_, tangent_);
}

DualTensor DualTensor::constant(Tensor value) {
  Tensor zero = Tensor::zeros_like(value);
  return DualTensor(std::move(value), std::move(zero), true);
}

DualTensor add(const DualTensor& a, const DualTensor& b) {
  Tensor v = add(a.value(), b.value());
  if (a.tangent_is_zero() && b.tangent_is_zero()) return DualTensor::constant(std::move(v));
  return DualTensor(std::move(v), add(a.tangent(), b.tangent()));
}

DualTensor sub(const DualTensor& a, const DualTensor& b) {
  Tensor v = sub(a.value(), b.value());
  if (a.tangent_is_zero() && b.tangent_is_zero()) return DualTensor::constant(std::move(v));
  return DualTensor(std::move(v), sub(a.tangent(), b.tangent()));
}

DualTensor add_bias(const DualTensor& a, const DualTensor& bias) {
  Tensor v = add_bias(a.value(), bias.value());
  if (a.tangent_is_zero() && bias.tangent_is_zero()) return DualTensor::constant(std::move(v));
  return DualTensor(std::move(v), add_bias(a.tangent(), bias.tangent()));
}

DualTensor mul_scalar(const DualTensor& a, double s) {
  Tensor v = mul_scalar(a.value(), s);
  if (a.tangent_is_zero()) return DualTensor::constant(std::move(v));
  return DualTensor(std::move(v), mul_scalar(a.tangent(), s));
}

DualTensor matmul(const DualTensor& a, const DualTensor& b) {
  Tensor v = matmul(a.value(), b.value());
  if (a.tangent_is_zero() && b.tangent_is_zero()) return DualTensor::constant(std::move(v));
  if (b.tangent_is_zero()) return DualTensor(std::move(v), matmul(a.tangent(), b.value()));
  if (a.tangent_is_zero()) return DualTensor(std::move(v), matmul(a.value(), b.tangent()));
  return DualTensor(std::move(v), add(matmul(a.tangent(), b.value()), matmul(a.value(), b.tangent())));
}

DualTensor concat_last_dim(const DualTensor& a, const DualTensor& b) {
  Tensor v = concat_last_dim(a.value(), b.value());
  if (a.tangent_is_zero() && b.tangent_is_zero()) return DualTensor::constant(std::move(v));
  return DualTensor(std::move(v), concat_last_dim(a.tangent(), b.tangent()));
}

DualTensor silu(const DualTensor& a) {
  Tensor v = silu(a.value());
  if (a.tangent_is_zero()) return DualTensor::constant(std::move(v));
  return DualTensor(std::move(v), hadamard(silu_grad(a.value()), a.tangent()));
}

DualTensor sin_cos_features(const DualTensor& s, std::span<const double> freqs) {
  Tensor v = sin_cos_features(s.value(), freqs);
  if (s.tangent_is_zero()) return DualTensor::constant(std::move(v));
  const std::size_t f = freqs.size();
  Tensor t(v.shape());
  for (std::size_t r = 0; r < v.rows(); ++r) {
    const double ds = s.tangent()[r];
    for (std::size_t j = 0; j < f; ++j) {
      // d sin(w s) = w cos(w s) ds; d cos(w s) = -w sin(w s) ds
      t.at(r, j) = freqs[j] * v.at(r, f + j) * ds;
      t.at(r, f + j) = -freqs[j] * v.at(r, j) * ds;
    }
  }
  return DualTensor(std::move(v), std::move(t));
}

DualTensor mean(const DualTensor& a) {
  Tensor v = mean(a.value());
  if (a.tangent_is_zero()) return DualTensor::constant(std::move(v));
  return DualTensor(std::move(v), mean(a.tangent()));
}

DualTensor sum_sq(const DualTensor& a) {
  Tensor v = sum_sq(a.value());
  if (a.tangent_is_zero()) return DualTensor::constant(std::move(v));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) acc += 2.0 * a.value()[i] * a.tangent()[i];
  return DualTensor(std::move(v), Tensor::scalar(acc));
}

DualTensor apply_custom(std::shared_ptr<const CustomOp> op, std::span<const DualTensor> inputs) {
  if (!op->eval) throw MissingRuleError("primitive '" + op->name + "' has no evaluation rule");
  if (!op->jvp) throw MissingRuleError("primitive '" + op->name + "' has no forward-mode rule");
  std::vector<Tensor> values, tangents;
  for (const auto& d : inputs) {
    values.push_back(d.value());
    tangents.push_back(d.tangent());
  }
  Tensor v = op->eval(values);
  Tensor t = op->jvp(values, tangents);
  return DualTensor(std::move(v), std::move(t));
}

}  // namespace mflab::num
