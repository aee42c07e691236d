#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mflab/harness/config.hpp"
#include "mflab/harness/io.hpp"
#include "mflab/harness/task_data.hpp"
#include "mflab/net/checkpoint.hpp"

namespace mflab::harness {

using LogFn = std::function<void(const std::string&)>;

struct TrainOptions {
  net::NetMode mode = net::NetMode::fm;
  // fm checkpoint to start from. For mf runs it is converted with
  // duplicate_time_embedding and also serves as the frozen teacher when the
  // velocity source is "pretrained".
  std::optional<std::filesystem::path> init_from;
  // Continue from <out>/<mode>/latest.json with its optimizer state.
  bool resume = false;
  // Overrides fm_steps / mf_steps; the total, not the number of extra steps.
  std::optional<std::int64_t> steps;
  LogFn log;
};

struct TrainOutcome {
  net::VelocityNet net;
  std::vector<MetricsRow> metrics;
  std::filesystem::path latest_checkpoint;
};

/// Run directory layout: <out>/<mode>/step_<NNNNNNNN>.json periodic
/// checkpoints, latest.json, metrics.csv, and last_good.json written when a
/// non-finite loss or gradient aborts the run (NumericError is rethrown).
/// Step s draws its batch from a stream keyed by s, so a resumed run follows
/// the uninterrupted trajectory exactly.
TrainOutcome train(const ExperimentConfig& cfg, const TrainOptions& opts);

std::filesystem::path run_dir(const ExperimentConfig& cfg, net::NetMode mode);

/// Samples every condition at each configured step count from the same
/// initial noise (mf nets use the flow map, fm nets Euler on forward_v).
/// Fidelity is reported for mixture tasks, energy distance uses the smallest
/// step count against fresh reference data (mean over conditions), and
/// curvature comes from the largest step count when it has >= 2 steps.
MetricsRow evaluate(const net::VelocityNet& net, const TaskData& data, const EvalConfig& eval, std::uint64_t seed,
                    std::int64_t step);

/// Per-condition samples for one step count, sharing evaluate's noise streams.
std::vector<std::pair<std::string, sample::SampleRun>> sample_conditions(const net::VelocityNet& net,
                                                                          const TaskData& data, std::size_t steps,
                                                                          std::size_t n, std::uint64_t seed,
                                                                          bool record,
                                                                          std::optional<net::NetMode> as = {});

}  // namespace mflab::harness
