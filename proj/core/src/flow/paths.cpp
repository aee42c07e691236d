#include "mflab/flow/paths.hpp"

#include "mflab/num/kernels.hpp"

namespace mflab::flow {

Tensor interpolate(const Tensor& x, const Tensor& eps, double t) {
  num::require_same_shape("interpolate", x, eps);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - t) * x[i] + t * eps[i];
  return out;
}

Tensor interpolate(const Tensor& x, const Tensor& eps, const Tensor& t) {
  num::require_same_shape("interpolate", x, eps);
  if (t.rows() != x.rows() || t.cols() != 1)
    throw ShapeError("interpolate: time column " + num::shape_str(t.shape()) + " does not match " +
                     num::shape_str(x.shape()));
  Tensor out = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double tr = t[r];
    auto row = out.row_span(r);
    auto xr = x.row_span(r), er = eps.row_span(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (1.0 - tr) * xr[j] + tr * er[j];
  }
  return out;
}

Tensor cond_velocity(const Tensor& x, const Tensor& eps) { return num::sub(eps, x); }

}  // namespace mflab::flow
