#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "mflab/errors.hpp"
#include "mflab/num/dual.hpp"
#include "mflab/num/kernels.hpp"
#include "mflab/num/tape.hpp"
#include "test_support.hpp"

namespace mflab::num {
namespace {

using testing::uniform_tensor;

// A composite that touches every built-in primitive. Generic over the context
// so the same body runs plainly, on duals and on a tape.
template <class V>
V composite(const V& x, const V& w, const V& b, const V& s, std::span<const double> freqs) {
  V h = silu(add_bias(matmul(x, w), b));                        // B x 3
  V f = sin_cos_features(s, freqs);                             // B x 4
  V g = concat_last_dim(h, f);                                  // B x 7
  V d = sub(mul_scalar(g, 0.7), add(g, g));
  return add(mean(d), sum_sq(g));
}

const std::vector<double> kFreqs{0.5, 2.0};

double plain_value(const Tensor& x, const Tensor& w, const Tensor& b, const Tensor& s) {
  return composite<Tensor>(x, w, b, s, kFreqs).item();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-3, std::max(std::abs(a), std::abs(b))); }

TEST(Tape, GradientMatchesCentralDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = uniform_tensor(rng, {4, 2}, -1, 1);
    Tensor w = uniform_tensor(rng, {2, 3}, -1, 1);
    Tensor b = uniform_tensor(rng, {1, 3}, -1, 1);
    Tensor s = uniform_tensor(rng, {4, 1}, 0, 1);
    Tape tape;
    const Var loss = composite(tape.constant(x), tape.param("w", w), tape.param("b", b), tape.param("s", s), kFreqs);
    const Gradients g = tape.backward(loss);
    ASSERT_EQ(g.size(), 3u);
    for (auto* p : {&w, &b, &s}) {
      const std::string name = p == &w ? "w" : p == &b ? "b" : "s";
      for (std::size_t i = 0; i < p->size(); ++i) {
        const double keep = (*p)[i];
        const double h = 1e-5;
        (*p)[i] = keep + h;
        const double up = plain_value(x, w, b, s);
        (*p)[i] = keep - h;
        const double down = plain_value(x, w, b, s);
        (*p)[i] = keep;
        EXPECT_LT(rel_err(g.at(name)[i], (up - down) / (2 * h)), 1e-7) << name << "[" << i << "]";
      }
    }
  }
}

TEST(Tape, UnusedParameterGetsZeroGradient) {
  Tape tape;
  const Var a = tape.param("a", Tensor::matrix({{1, 2}}));
  tape.param("unused", Tensor::matrix({{3}}));
  const Gradients g = tape.backward(sum_sq(a));
  EXPECT_EQ(g.at("a"), Tensor::matrix({{2, 4}}));
  EXPECT_EQ(g.at("unused"), Tensor::matrix({{0}}));
}

TEST(Tape, BackwardNeedsScalarLoss) {
  Tape tape;
  const Var a = tape.param("a", Tensor::matrix({{1, 2}}));
  EXPECT_THROW(tape.backward(a), ShapeError);
}

TEST(Dual, JvpMatchesCentralDifferences) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = uniform_tensor(rng, {3, 2}, -1, 1);
    const Tensor w = uniform_tensor(rng, {2, 3}, -1, 1);
    const Tensor b = uniform_tensor(rng, {1, 3}, -1, 1);
    const Tensor s = uniform_tensor(rng, {3, 1}, 0, 1);
    const Tensor dx = uniform_tensor(rng, {3, 2}, -1, 1);
    const Tensor ds = uniform_tensor(rng, {3, 1}, -1, 1);
    const Tensor inputs[] = {x, s};
    const Tensor tangents[] = {dx, ds};
    auto f = [&](std::span<const DualTensor> in) {
      return composite(in[0], DualTensor::constant(w), DualTensor::constant(b), in[1], kFreqs);
    };
    const auto [value, tangent] = jvp(f, inputs, tangents);
    EXPECT_DOUBLE_EQ(value.item(), plain_value(x, w, b, s));
    const double h = 1e-6;
    Tensor xp = x, xm = x, sp = s, sm = s;
    axpy_inplace(xp, h, dx);
    axpy_inplace(xm, -h, dx);
    axpy_inplace(sp, h, ds);
    axpy_inplace(sm, -h, ds);
    const double fd = (plain_value(xp, w, b, sp) - plain_value(xm, w, b, sm)) / (2 * h);
    EXPECT_LT(rel_err(tangent.item(), fd), 1e-6);
  }
}

TEST(Dual, JvpIsLinearInTheTangent) {
  Rng rng(13);
  const Tensor x = uniform_tensor(rng, {3, 2}, -1, 1);
  const Tensor w = uniform_tensor(rng, {2, 3}, -1, 1);
  const Tensor b = uniform_tensor(rng, {1, 3}, -1, 1);
  const Tensor s = uniform_tensor(rng, {3, 1}, 0, 1);
  auto f = [&](std::span<const DualTensor> in) {
    return composite(in[0], DualTensor::constant(w), DualTensor::constant(b), in[1], kFreqs);
  };
  const Tensor inputs[] = {x, s};
  const Tensor a1[] = {uniform_tensor(rng, {3, 2}, -1, 1), uniform_tensor(rng, {3, 1}, -1, 1)};
  const Tensor a2[] = {uniform_tensor(rng, {3, 2}, -1, 1), uniform_tensor(rng, {3, 1}, -1, 1)};
  Tensor combo[] = {a1[0], a1[1]};
  for (int k = 0; k < 2; ++k) {
    combo[k] = mul_scalar(combo[k], 2.0);
    axpy_inplace(combo[k], -3.0, a2[k]);
  }
  const double j1 = jvp(f, inputs, a1).second.item();
  const double j2 = jvp(f, inputs, a2).second.item();
  const double jc = jvp(f, inputs, combo).second.item();
  EXPECT_NEAR(jc, 2.0 * j1 - 3.0 * j2, 1e-12 * (1.0 + std::abs(jc)));
}

TEST(Dual, TangentShapeMustMatch) {
  const Tensor inputs[] = {Tensor::full(2, 2, 1.0)};
  const Tensor tangents[] = {Tensor::full(2, 1, 1.0)};
  auto f = [](std::span<const DualTensor> in) { return in[0]; };
  EXPECT_THROW(jvp(f, inputs, tangents), ShapeError);
}

std::shared_ptr<CustomOp> cube_op(bool with_vjp, bool with_jvp) {
  auto op = std::make_shared<CustomOp>();
  op->name = "cube";
  op->eval = [](std::span<const Tensor> in) {
    Tensor out = in[0];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] * out[i] * out[i];
    return out;
  };
  if (with_vjp)
    op->vjp = [](std::span<const Tensor> in, const Tensor&, const Tensor& adj) {
      Tensor g = adj;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 3.0 * in[0][i] * in[0][i];
      return std::vector<Tensor>{g};
    };
  if (with_jvp)
    op->jvp = [](std::span<const Tensor> in, std::span<const Tensor> tan) {
      Tensor d = tan[0];
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 3.0 * in[0][i] * in[0][i];
      return d;
    };
  return op;
}

TEST(CustomOp, BothRulesAgreeWithCalculus) {
  const auto op = cube_op(true, true);
  Tape tape;
  const Var x = tape.param("x", Tensor::matrix({{2.0, -1.0}}));
  const Var xs[] = {x};
  const Gradients g = tape.backward(sum_sq(apply_custom(op, xs)));
  // d/dx (x^3)^2 = 6 x^5
  EXPECT_DOUBLE_EQ(g.at("x")[0], 192.0);
  EXPECT_DOUBLE_EQ(g.at("x")[1], -6.0);

  const DualTensor d[] = {DualTensor(Tensor::matrix({{2.0}}), Tensor::matrix({{0.5}}))};
  EXPECT_DOUBLE_EQ(apply_custom(op, d).tangent().item(), 6.0);
}

TEST(CustomOp, MissingRulesRaiseNamedErrors) {
  const auto no_vjp = cube_op(false, true);
  Tape tape;
  const Var xs[] = {tape.param("x", Tensor::matrix({{1.0}}))};
  const Var y = apply_custom(no_vjp, xs);
  try {
    tape.backward(sum_sq(y));
    FAIL() << "expected MissingRuleError";
  } catch (const MissingRuleError& e) {
    EXPECT_NE(std::string(e.what()).find("cube"), std::string::npos);
  }

  const auto no_jvp = cube_op(true, false);
  const DualTensor d[] = {DualTensor(Tensor::matrix({{1.0}}), Tensor::matrix({{1.0}}))};
  EXPECT_THROW(apply_custom(no_jvp, d), MissingRuleError);
}

}  // namespace
}  // namespace mflab::num
