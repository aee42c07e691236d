#pragma once

#include <span>

#include "mflab/num/tensor.hpp"

// Value kernels of the primitive set. The tape and the dual-number engine
// reuse these for their forward values and build their rules out of them.
namespace mflab::num {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// a (B x n) + bias (1 x n), bias broadcast over rows.
Tensor add_bias(const Tensor& a, const Tensor& bias);
Tensor mul_scalar(const Tensor& a, double s);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor concat_last_dim(const Tensor& a, const Tensor& b);
Tensor silu(const Tensor& a);
// s is a B x 1 column; output is B x 2F laid out as [sin(f_j s) ..., cos(f_j s) ...].
Tensor sin_cos_features(const Tensor& s, std::span<const double> freqs);
Tensor mean(const Tensor& a);
Tensor sum_sq(const Tensor& a);

// Helpers used by the differentiation rules.
Tensor transpose(const Tensor& a);
Tensor column_sums(const Tensor& a);
Tensor hadamard(const Tensor& a, const Tensor& b);
// Derivative of silu evaluated elementwise.
Tensor silu_grad(const Tensor& a);
// Rows scaled by the entries of a B x 1 column.
Tensor scale_rows(const Tensor& a, const Tensor& col);
// Splits the columns of a into [0, left_cols) and [left_cols, end).
std::pair<Tensor, Tensor> split_last_dim(const Tensor& a, std::size_t left_cols);
void axpy_inplace(Tensor& y, double alpha, const Tensor& x);

}  // namespace mflab::num
