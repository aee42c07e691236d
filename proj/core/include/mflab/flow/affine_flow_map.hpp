#pragma once

#include "mflab/num/dual.hpp"
#include "mflab/num/tensor.hpp"

namespace mflab::flow {

/// Hand-built linear flow map u(z, t, r) = A z + b t + c r (psi ignored).
/// Its total derivative along (v, 1, 0, 0) is b + A v, which makes the
/// MeanFlow target checkable by hand.
class AffineFlowMap {
 public:
  // a: d x d, b and c: length-d rows (1 x d).
  AffineFlowMap(num::Tensor a, num::Tensor b, num::Tensor c);

  num::Tensor forward_u(const num::Tensor& z, const num::Tensor& t, const num::Tensor& r,
                        const num::Tensor& psi) const;
  num::DualTensor u_dual(const num::DualTensor& z, const num::DualTensor& t, const num::DualTensor& r,
                         const num::DualTensor& psi) const;

  const num::Tensor& a() const { return a_; }
  const num::Tensor& b() const { return b_; }
  const num::Tensor& c() const { return c_; }

 private:
  num::Tensor apply_linear(const num::Tensor& z, const num::Tensor& t, const num::Tensor& r) const;
  num::Tensor a_t_;  // A transposed, so rows map as z_row * A^T
  num::Tensor a_, b_, c_;
};

}  // namespace mflab::flow
