#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mflab/num/custom_op.hpp"
#include "mflab/num/tensor.hpp"

namespace mflab::num {

/// A value and its directional derivative, propagated together through the
/// primitive set. Constants carry an all-zero tangent and are flagged so the
/// rules can skip work that would only add zeros.
class DualTensor {
 public:
  DualTensor(Tensor value, Tensor tangent);
  static DualTensor constant(Tensor value);

  const Tensor& value() const noexcept { return value_; }
  const Tensor& tangent() const noexcept { return tangent_; }
  bool tangent_is_zero() const noexcept { return zero_; }

 private:
  DualTensor(Tensor value, Tensor tangent, bool zero)
      : value_(std::move(value)), tangent_(std::move(tangent)), zero_(zero) {}
  Tensor value_;
  Tensor tangent_;
  bool zero_ = false;
};

DualTensor add(const DualTensor& a, const DualTensor& b);
DualTensor sub(const DualTensor& a, const DualTensor& b);
DualTensor add_bias(const DualTensor& a, const DualTensor& bias);
DualTensor mul_scalar(const DualTensor& a, double s);
DualTensor matmul(const DualTensor& a, const DualTensor& b);
DualTensor concat_last_dim(const DualTensor& a, const DualTensor& b);
DualTensor silu(const DualTensor& a);
DualTensor sin_cos_features(const DualTensor& s, std::span<const double> freqs);
DualTensor mean(const DualTensor& a);
DualTensor sum_sq(const DualTensor& a);
DualTensor apply_custom(std::shared_ptr<const CustomOp> op, std::span<const DualTensor> inputs);

/// Evaluation context whose values are DualTensors. Parameters enter as constants.
struct DualContext {
  using value_type = DualTensor;
  DualTensor param(const std::string&, const Tensor& value) const { return DualTensor::constant(value); }
  DualTensor constant(Tensor value) const { return DualTensor::constant(std::move(value)); }
};

/// Plain value evaluation with no derivative bookkeeping.
struct PlainContext {
  using value_type = Tensor;
  const Tensor& param(const std::string&, const Tensor& value) const { return value; }
  Tensor constant(Tensor value) const { return value; }
};

/// Forward-mode Jacobian-vector product: evaluates f once on dual inputs and
/// returns (f(inputs), df(inputs)[tangents]). Nothing is recorded on a tape.
template <class F>
std::pair<Tensor, Tensor> jvp(F&& f, std::span<const Tensor> inputs, std::span<const Tensor> tangents) {
  if (inputs.size() != tangents.size()) {
    throw ShapeError("jvp: " + std::to_string(inputs.size()) + " inputs but " + std::to_string(tangents.size()) +
                     " tangents");
  }
  std::vector<DualTensor> duals;
  duals.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    require_same_shape("jvp", inputs[i], tangents[i]);
    duals.emplace_back(inputs[i], tangents[i]);
  }
  DualTensor out = f(std::span<const DualTensor>(duals));
  return {out.value(), out.tangent()};
}

}  // namespace mflab::num
