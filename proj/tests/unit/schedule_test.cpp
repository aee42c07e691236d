#include <gtest/gtest.h>

#include <cmath>

#include "mflab/errors.hpp"
#include "mflab/flow/schedule.hpp"

namespace mflab::flow {
namespace {

ScheduleConfig uniform_with_ratio(double ratio) {
  ScheduleConfig cfg;
  cfg.family = TimeFamily::uniform;
  cfg.neq_ratio_start = cfg.neq_ratio_end = ratio;
  return cfg;
}

TEST(Schedule, AllPairsUnequalGiveMaxOfTwoUniforms) {
  // t = max(U1, U2) has P(t >= 1/2) = 1 - 1/4.
  const ScheduleConfig cfg = uniform_with_ratio(1.0);
  num::Rng rng(1);
  const int n = 100000;
  int above = 0, ordered = 0;
  for (int i = 0; i < n; ++i) {
    const TimePair p = sample_timepair(rng, 0.5, cfg);
    above += p.t >= 0.5;
    ordered += p.t >= p.r;
  }
  EXPECT_NEAR(static_cast<double>(above) / n, 0.75, 0.02);
  EXPECT_EQ(ordered, n);
}

TEST(Schedule, ZeroRatioGivesEqualPairs) {
  const ScheduleConfig cfg = uniform_with_ratio(0.0);
  num::Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const TimePair p = sample_timepair(rng, 0.3, cfg);
    ASSERT_EQ(p.t, p.r);
  }
}

TEST(Schedule, RatioInterpolatesWithProgress) {
  ScheduleConfig cfg;
  cfg.family = TimeFamily::uniform;
  cfg.neq_ratio_start = 0.2;
  cfg.neq_ratio_end = 0.6;
  EXPECT_DOUBLE_EQ(cfg.neq_ratio(0.0), 0.2);
  EXPECT_DOUBLE_EQ(cfg.neq_ratio(0.5), 0.4);
  EXPECT_DOUBLE_EQ(cfg.neq_ratio(1.0), 0.6);
  num::Rng rng(3);
  const int n = 50000;
  int unequal = 0;
  for (int i = 0; i < n; ++i) {
    const TimePair p = sample_timepair(rng, 0.5, cfg);
    unequal += p.t != p.r;
  }
  EXPECT_NEAR(static_cast<double>(unequal) / n, 0.4, 0.01);
  EXPECT_THROW(cfg.neq_ratio(1.5), ValidationError);
}

TEST(Schedule, LogitNormalMoments) {
  ScheduleConfig cfg;
  cfg.mu_start = -1.0;
  cfg.mu_end = 1.0;
  cfg.sigma_start = cfg.sigma_end = 0.8;
  num::Rng rng(4);
  const int n = 50000;
  double m = 0.0, s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = sample_time(rng, 0.75, cfg);
    ASSERT_GT(t, 0.0);
    ASSERT_LT(t, 1.0);
    const double logit = std::log(t / (1.0 - t));
    m += logit;
    s += logit * logit;
  }
  m /= n;
  s = std::sqrt(s / n - m * m);
  EXPECT_NEAR(m, 0.5, 4 * 0.8 / std::sqrt(n));
  EXPECT_NEAR(s, 0.8, 0.01);
}

TEST(Schedule, ValidationAndParsing) {
  EXPECT_THROW(uniform_with_ratio(1.5).validate(), ValidationError);
  ScheduleConfig bad;
  bad.sigma_end = 0.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  EXPECT_EQ(parse_time_family("logit-normal"), TimeFamily::logit_normal);
  EXPECT_THROW(parse_time_family("beta"), ValidationError);
}

}  // namespace
}  // namespace mflab::flow
