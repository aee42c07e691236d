#include "mflab/flow/affine_flow_map.hpp"

#include "mflab/num/kernels.hpp"

namespace mflab::flow {

AffineFlowMap::AffineFlowMap(num::Tensor a, num::Tensor b, num::Tensor c)
    : a_t_(num::transpose(a)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  num::require_matrix("AffineFlowMap", a_);
  const std::size_t d = a_.rows();
  if (a_.cols() != d || b_.size() != d || c_.size() != d)
    throw ShapeError("AffineFlowMap: need a square A and b, c of matching length");
  b_ = b_.reshaped({1, d});
  c_ = c_.reshaped({1, d});
}

num::Tensor AffineFlowMap::apply_linear(const num::Tensor& z, const num::Tensor& t, const num::Tensor& r) const {
  num::Tensor out = num::matmul(z, a_t_);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row_span(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b_[j] * t[i] + c_[j] * r[i];
  }
  return out;
}

num::Tensor AffineFlowMap::forward_u(const num::Tensor& z, const num::Tensor& t, const num::Tensor& r,
                                     const num::Tensor&) const {
  return apply_linear(z, t, r);
}

num::DualTensor AffineFlowMap::u_dual(const num::DualTensor& z, const num::DualTensor& t, const num::DualTensor& r,
                                      const num::DualTensor&) const {
  // Linear in (z, t, r), so the tangent is the same map applied to the tangents.
  return num::DualTensor(apply_linear(z.value(), t.value(), r.value()),
                         apply_linear(z.tangent(), t.tangent(), r.tangent()));
}

}  // namespace mflab::flow
