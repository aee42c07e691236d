#pragma once

#include <string_view>

#include "mflab/num/rng.hpp"

namespace mflab::flow {

/// A (t, r) training pair with t >= r; t is the noisier end.
struct TimePair {
  double t = 0.0;
  double r = 0.0;
};

enum class TimeFamily { uniform, logit_normal };

std::string_view to_string(TimeFamily family);
TimeFamily parse_time_family(std::string_view text);

/// Adaptive timestep schedule. mu, sigma and the non-equal ratio are
/// interpolated linearly in training progress p in [0, 1].
struct ScheduleConfig {
  TimeFamily family = TimeFamily::logit_normal;
  double mu_start = 0.0;
  double mu_end = 0.0;
  double sigma_start = 1.0;
  double sigma_end = 1.0;
  double neq_ratio_start = 0.25;
  double neq_ratio_end = 0.75;

  void validate() const;
  double mu(double progress) const;
  double sigma(double progress) const;
  double neq_ratio(double progress) const;
};

// One time from the configured family at the given progress.
double sample_time(num::Rng& rng, double progress, const ScheduleConfig& cfg);

/// Two draws from the family; with probability 1 - neq_ratio(p) the pair is
/// collapsed to r = t (first draw), otherwise ordered so that t >= r.
TimePair sample_timepair(num::Rng& rng, double progress, const ScheduleConfig& cfg);

}  // namespace mflab::flow
