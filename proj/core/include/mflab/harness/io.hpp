#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mflab/json_io.hpp"
#include "mflab/sample/metrics.hpp"

namespace mflab::harness {

using num::Tensor;

struct SampleRecord {
  std::string condition;
  std::vector<double> x;
  std::vector<std::vector<double>> path;  // optional trajectory, first state at t = 1
};

/// Line-oriented point set: a header line followed by one record per line.
///   {"format": "mflab.samples", "version": 1, "kind": "dataset"|"samples",
///    "config_digest": ..., "config": {...}, "data_dim": D, "steps": n|null,
///    "count": N}
///   {"condition": "c0_1", "x": [...], "path": [[...], ...]}
struct SampleSet {
  std::string kind = "samples";
  std::string config_digest;
  Json config = Json::object();
  std::size_t data_dim = 0;
  std::optional<std::size_t> steps;
  std::vector<SampleRecord> records;

  // Appends every row of run.samples (and its trajectory when recorded).
  void append(const std::string& condition, const sample::SampleRun& run);
  void append(const std::string& condition, const Tensor& points);
  bool has_paths() const;
};

std::string sample_set_to_jsonl(const SampleSet& set);
SampleSet parse_sample_set(const std::string& content);
void save_sample_set(const SampleSet& set, const std::filesystem::path& path);
SampleSet load_sample_set(const std::filesystem::path& path);

// Records grouped by condition, in order of first appearance.
std::vector<sample::ConditionSamples> group_by_condition(const SampleSet& set);
// Per condition, the recorded trajectories as a SampleRun (samples = final states).
std::vector<std::pair<std::string, sample::SampleRun>> trajectories_by_condition(const SampleSet& set);

/// One evaluation row of a training run.
struct MetricsRow {
  std::int64_t step = 0;
  double loss = 0.0;  // mean training loss since the previous row
  std::map<std::size_t, double> fidelity;  // keyed by sampling step count
  std::optional<double> energy_distance;
  std::optional<double> curvature;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

/// CSV with a "# config_digest=<hex>" comment line, a header
/// step,loss,fidelity_<n>...,energy_distance,curvature and one row per
/// evaluation. Missing values are empty cells.
std::string metrics_to_csv(const std::vector<MetricsRow>& rows, const std::vector<std::size_t>& step_counts,
                           const std::string& config_digest);
std::vector<MetricsRow> parse_metrics_csv(const std::string& content, std::string* config_digest = nullptr);

// Shortest decimal that round-trips.
std::string format_double(double v);

}  // namespace mflab::harness
