#include "mflab/flow/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mflab/errors.hpp"

namespace mflab::flow {

namespace {

double lerp(double a, double b, double p) { return a + p * (b - a); }

void check_progress(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("schedule progress must lie in [0, 1]");
}

}  // namespace

std::string_view to_string(TimeFamily family) {
  return family == TimeFamily::uniform ? "uniform" : "logit-normal";
}

TimeFamily parse_time_family(std::string_view text) {
  if (text == "uniform") return TimeFamily::uniform;
  if (text == "logit-normal" || text == "logit_normal") return TimeFamily::logit_normal;
  throw ValidationError("unknown time family '" + std::string(text) + "' (expected uniform or logit-normal)");
}

void ScheduleConfig::validate() const {
  for (double r : {neq_ratio_start, neq_ratio_end})
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("schedule neq ratios must lie in [0, 1]");
  if (!(sigma_start > 0.0) || !(sigma_end > 0.0)) throw ValidationError("schedule sigmas must be positive");
}

double ScheduleConfig::mu(double p) const {
  check_progress(p);
  return lerp(mu_start, mu_end, p);
}

double ScheduleConfig::sigma(double p) const {
  check_progress(p);
  return lerp(sigma_start, sigma_end, p);
}

double ScheduleConfig::neq_ratio(double p) const {
  check_progress(p);
  return lerp(neq_ratio_start, neq_ratio_end, p);
}

double sample_time(num::Rng& rng, double progress, const ScheduleConfig& cfg) {
  if (cfg.family == TimeFamily::uniform) {
    check_progress(progress);
    return rng.uniform();
  }
  const double x = cfg.mu(progress) + cfg.sigma(progress) * rng.normal();
  return 1.0 / (1.0 + std::exp(-x));
}

TimePair sample_timepair(num::Rng& rng, double progress, const ScheduleConfig& cfg) {
  cfg.validate();
  const double a = sample_time(rng, progress, cfg);
  const double b = sample_time(rng, progress, cfg);
  const double coin = rng.uniform();
  if (coin >= cfg.neq_ratio(progress)) return TimePair{a, a};
  return TimePair{std::max(a, b), std::min(a, b)};
}

}  // namespace mflab::flow
