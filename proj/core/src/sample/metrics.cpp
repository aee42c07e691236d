#include "mflab/sample/metrics.hpp"

#include <cmath>
#include <limits>

namespace mflab::sample {

namespace {

double mean_pair_distance(const Tensor& a, const Tensor& b) {
  const std::size_t d = a.cols();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.data().data() + i * d;
    double row_acc = 0.0;
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = b.data().data() + j * d;
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = ai[k] - bj[k];
        s += diff * diff;
      }
      row_acc += std::sqrt(s);
    }
    acc += row_acc;
  }
  return acc / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

double energy_distance(const Tensor& a, const Tensor& b) {
  num::require_matrix("energy_distance", a);
  num::require_matrix("energy_distance", b);
  if (a.cols() != b.cols()) {
    throw ShapeError("energy_distance: dimensionality mismatch " + num::shape_str(a.shape()) + " vs " +
                     num::shape_str(b.shape()));
  }
  const double cross = mean_pair_distance(a, b);
  const double within_a = mean_pair_distance(a, a);
  const double within_b = mean_pair_distance(b, b);
  // Clamp tiny negative rounding residue; the statistic is non-negative.
  return std::max(0.0, 2.0 * cross - within_a - within_b);
}

CurvatureStats trajectory_curvature(const SampleRun& run, double min_chord) {
  if (run.intermediates.size() < 3) {
    throw ValidationError("trajectory_curvature: run must be recorded with at least 3 states per trajectory, got " +
                          std::to_string(run.intermediates.size()));
  }
  const Tensor& first = run.intermediates.front();
  const Tensor& last = run.intermediates.back();
  CurvatureStats stats;
  double acc = 0.0;
  for (std::size_t i = 0; i < first.rows(); ++i) {
    double length = 0.0;
    for (std::size_t s = 0; s + 1 < run.intermediates.size(); ++s)
      length += distance(run.intermediates[s].row_span(i), run.intermediates[s + 1].row_span(i));
    const double chord = distance(first.row_span(i), last.row_span(i));
    if (chord < min_chord) {
      ++stats.skipped;
      continue;
    }
    acc += length / chord - 1.0;
    ++stats.used;
  }
  stats.mean = stats.used ? acc / static_cast<double>(stats.used) : 0.0;
  return stats;
}

FidelityReport condition_fidelity(const std::vector<ConditionSamples>& samples,
                                  const flow::CompositionalMixture& layout) {
  const auto tuples = layout.conditions();
  std::vector<std::vector<double>> means;
  for (const auto& c : tuples) means.push_back(layout.component_mean(c));

  FidelityReport report;
  std::size_t hits_total = 0, count_total = 0;
  for (const auto& cs : samples) {
    const ConditionTuple tuple = parse_condition_id(cs.condition_id);
    const std::size_t commanded = layout.component_index(tuple);
    if (cs.samples.cols() != layout.data_dim)
      throw ShapeError("condition_fidelity: samples for " + cs.condition_id + " have the wrong dimension");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cs.samples.rows(); ++i) {
      auto row = cs.samples.row_span(i);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < means.size(); ++k) {
        const double d = distance(row, means[k]);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (best == commanded) ++hits;
    }
    report.per_condition[cs.condition_id] = static_cast<double>(hits) / static_cast<double>(cs.samples.rows());
    hits_total += hits;
    count_total += cs.samples.rows();
  }
  report.overall = count_total ? static_cast<double>(hits_total) / static_cast<double>(count_total) : 0.0;
  return report;
}

Json FidelityReport::to_json() const {
  Json j;
  j["per_condition"] = per_condition;
  j["overall"] = overall;
  j["energy_distance"] = energy_distance ? Json(*energy_distance) : Json(nullptr);
  j["curvature"] = curvature ? Json(*curvature) : Json(nullptr);
  return j;
}

FidelityReport FidelityReport::from_json(const Json& j) {
  try {
    FidelityReport r;
    r.per_condition = j.at("per_condition").get<std::map<std::string, double>>();
    r.overall = j.at("overall").get<double>();
    if (!j.at("energy_distance").is_null()) r.energy_distance = j.at("energy_distance").get<double>();
    if (!j.at("curvature").is_null()) r.curvature = j.at("curvature").get<double>();
    for (const auto& [id, acc] : r.per_condition)
      if (acc < 0.0 || acc > 1.0) throw ValidationError("fidelity for " + id + " outside [0, 1]");
    return r;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed fidelity report: ") + e.what());
  }
}

}  // namespace mflab::sample
