#include <gtest/gtest.h>

#include <cmath>

#include "mflab/num/adam.hpp"

namespace mflab::num {
namespace {

TEST(Adam, FirstStepMovesEachEntryByLearningRate) {
  ParamSet params{{"a", Tensor::matrix({{1.0, -2.0, 0.5}})}};
  const Gradients grads{{"a", Tensor::matrix({{0.3, -40.0, 1e-3}})}};
  AdamState state;
  AdamConfig cfg;
  cfg.lr = 0.01;
  cfg.eps = 1e-12;
  adam_step(params, grads, state, cfg);
  EXPECT_EQ(state.step, 1);
  EXPECT_NEAR(params.at("a")[0], 0.99, 1e-9);
  EXPECT_NEAR(params.at("a")[1], -1.99, 1e-9);
  EXPECT_NEAR(params.at("a")[2], 0.49, 1e-8);
}

TEST(Adam, MatchesHandRecurrenceOverSeveralSteps) {
  ParamSet params{{"w", Tensor::matrix({{0.0}})}};
  AdamState state;
  AdamConfig cfg;
  double m = 0, v = 0, w = 0;
  const double gs[] = {1.0, -0.5, 2.0, 0.25};
  for (int k = 0; k < 4; ++k) {
    adam_step(params, Gradients{{"w", Tensor::matrix({{gs[k]}})}}, state, cfg);
    m = cfg.beta1 * m + (1 - cfg.beta1) * gs[k];
    v = cfg.beta2 * v + (1 - cfg.beta2) * gs[k] * gs[k];
    const double mh = m / (1 - std::pow(cfg.beta1, k + 1));
    const double vh = v / (1 - std::pow(cfg.beta2, k + 1));
    w -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    EXPECT_NEAR(params.at("w")[0], w, 1e-15);
  }
}

TEST(Adam, ConvergesOnConvexQuadratic) {
  // f(w) = sum_i c_i (w_i - a_i)^2, minimised at w = a.
  const double a[] = {1.5, -0.7, 0.2};
  const double c[] = {1.0, 10.0, 0.5};
  ParamSet params{{"w", Tensor::matrix({{0.0, 0.0, 0.0}})}};
  AdamState state;
  AdamConfig cfg;
  cfg.lr = 0.05;
  for (int k = 0; k < 500; ++k) {
    Tensor g({1, 3});
    for (std::size_t i = 0; i < 3; ++i) g[i] = 2.0 * c[i] * (params.at("w")[i] - a[i]);
    adam_step(params, Gradients{{"w", g}}, state, cfg);
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(params.at("w")[i] - a[i]), 1e-3) << i;
}

TEST(Adam, RejectsMismatchedGradients) {
  ParamSet params{{"w", Tensor::matrix({{0.0}})}};
  AdamState state;
  EXPECT_ANY_THROW(adam_step(params, Gradients{{"other", Tensor::matrix({{1.0}})}}, state, AdamConfig{}));
}

}  // namespace
}  // namespace mflab::num
