#include "mflab/num/kernels.hpp"

#include <Eigen/Core>
#include <cmath>

namespace mflab::num {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

MutMap as_matrix(Tensor& t) {
  return MutMap(t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_matrix("add_bias", a);
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw ShapeError("add_bias: bias " + shape_str(bias.shape()) + " does not broadcast over " +
                     shape_str(a.shape()));
  }
  Tensor out = a;
  const std::size_t c = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t j = 0; j < c; ++j) out.at(r, j) += bias[j];
  return out;
}

Tensor mul_scalar(const Tensor& a, double s) {
  Tensor out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  Tensor out({a.rows(), b.cols()});
  as_matrix(out).noalias() = as_matrix(a) * as_matrix(b);
  return out;
}

Tensor concat_last_dim(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows()) {
    throw ShapeError("concat_last_dim: incompatible shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  const std::size_t ca = a.cols(), cb = b.cols();
  Tensor out({a.rows(), ca + cb});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row_span(r);
    auto ra = a.row_span(r), rb = b.row_span(r);
    std::copy(ra.begin(), ra.end(), dst.begin());
    std::copy(rb.begin(), rb.end(), dst.begin() + static_cast<std::ptrdiff_t>(ca));
  }
  return out;
}

Tensor silu(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data()) v = v * sigmoid(v);
  return out;
}

Tensor silu_grad(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data()) {
    const double s = sigmoid(v);
    v = s * (1.0 + v * (1.0 - s));
  }
  return out;
}

Tensor sin_cos_features(const Tensor& s, std::span<const double> freqs) {
  if (s.rank() != 2 || s.cols() != 1) {
    throw ShapeError("sin_cos_features: expected a (B, 1) column, got " + shape_str(s.shape()));
  }
  if (freqs.empty()) throw ShapeError("sin_cos_features: empty frequency list");
  const std::size_t f = freqs.size();
  Tensor out({s.rows(), 2 * f});
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const double x = s[r];
    for (std::size_t j = 0; j < f; ++j) {
      out.at(r, j) = std::sin(freqs[j] * x);
      out.at(r, f + j) = std::cos(freqs[j] * x);
    }
  }
  return out;
}

Tensor mean(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return Tensor::scalar(acc / static_cast<double>(a.size()));
}

Tensor sum_sq(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return Tensor::scalar(acc);
}

Tensor transpose(const Tensor& a) {
  require_matrix("transpose", a);
  Tensor out({a.cols(), a.rows()});
  as_matrix(out) = as_matrix(a).transpose();
  return out;
}

Tensor column_sums(const Tensor& a) {
  require_matrix("column_sums", a);
  Tensor out({1, a.cols()});
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += a.at(r, j);
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape("hadamard", a, b);
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor scale_rows(const Tensor& a, const Tensor& col) {
  require_matrix("scale_rows", a);
  if (col.rows() != a.rows() || col.cols() != 1) {
    throw ShapeError("scale_rows: column " + shape_str(col.shape()) + " does not match " + shape_str(a.shape()));
  }
  Tensor out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (double& v : out.row_span(r)) v *= col[r];
  return out;
}

std::pair<Tensor, Tensor> split_last_dim(const Tensor& a, std::size_t left_cols) {
  require_matrix("split_last_dim", a);
  if (left_cols == 0 || left_cols >= a.cols()) {
    throw ShapeError("split_last_dim: split point out of range for " + shape_str(a.shape()));
  }
  const std::size_t right_cols = a.cols() - left_cols;
  Tensor left({a.rows(), left_cols}), right({a.rows(), right_cols});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto src = a.row_span(r);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(left_cols), left.row_span(r).begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(left_cols), src.end(), right.row_span(r).begin());
  }
  return {std::move(left), std::move(right)};
}

void axpy_inplace(Tensor& y, double alpha, const Tensor& x) {
  require_same_shape("axpy", y, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace mflab::num
