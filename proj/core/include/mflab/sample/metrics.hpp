#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mflab/flow/tasks.hpp"
#include "mflab/json_io.hpp"
#include "mflab/sample/sampler.hpp"

namespace mflab::sample {

/// Energy distance 2 E|a-b| - E|a-a'| - E|b-b'| over all pairs (V-statistic,
/// i.e. the i = j terms are included, so identical sets give exactly 0).
double energy_distance(const Tensor& a, const Tensor& b);

struct CurvatureStats {
  double mean = 0.0;        // mean of (path length / chord) - 1 over used trajectories
  std::size_t used = 0;
  std::size_t skipped = 0;  // trajectories whose chord is below min_chord
};

/// Needs a run recorded with at least 3 states per trajectory.
CurvatureStats trajectory_curvature(const SampleRun& run, double min_chord = 1e-12);

struct ConditionSamples {
  std::string condition_id;
  Tensor samples;
};

struct FidelityReport {
  std::map<std::string, double> per_condition;
  double overall = 0.0;
  std::optional<double> energy_distance;
  std::optional<double> curvature;

  Json to_json() const;
  static FidelityReport from_json(const Json& j);
};

/// Nearest-component-mean classification; accuracy is the fraction of each
/// condition's samples assigned to the commanded component. `overall` pools
/// every sample.
FidelityReport condition_fidelity(const std::vector<ConditionSamples>& samples,
                                  const flow::CompositionalMixture& layout);

}  // namespace mflab::sample
