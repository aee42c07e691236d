#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mflab/enc/analysis.hpp"
#include "mflab/harness/config.hpp"
#include "mflab/harness/experiments.hpp"
#include "mflab/harness/io.hpp"
#include "mflab/harness/training.hpp"

namespace mflab::harness {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitAcceptance = 3;

int exit_code_for(const std::exception& e);

/// Loads a config file and applies --seed / --out overrides.
ExperimentConfig resolve_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed,
                                const std::optional<std::string>& out);

/// Writes <out>/data/dataset.jsonl (dataset_per_condition points for every
/// condition), <out>/data/embeddings.json for synthetic embeddings and
/// <out>/data/manifest.json. Returns the manifest.
Json gen_data(const ExperimentConfig& cfg);

struct SampleOptions {
  std::filesystem::path checkpoint;
  std::size_t steps = 1;
  std::vector<std::string> conditions;  // empty: every condition
  std::size_t n = 1000;
  std::optional<std::uint64_t> seed;    // default: the checkpoint's seed
  bool record_paths = false;
  // As fm (Euler on forward_v) or mf (flow map); default: the checkpoint's mode.
  std::optional<net::NetMode> as;
};

/// Condition c draws its initial noise from a stream keyed by (seed, c) only,
/// so runs that differ in `steps` start from identical noise.
SampleSet sample_checkpoint(const SampleOptions& opts);

struct EvalOptions {
  std::filesystem::path samples;
  std::filesystem::path dataset;
  bool force_digest = false;
};

/// Energy distance (mean over the sampled conditions, against the dataset's
/// points of the same condition), condition fidelity for mixture tasks, and
/// curvature when the samples carry trajectories.
Json evaluate_samples(const EvalOptions& opts);

struct AnalyzeOptions {
  std::filesystem::path corpus;
  std::string metric;  // discriminability | disentanglement
  std::size_t k = 5;
  double rho = 0.5;
  std::uint64_t seed = 0;
  std::size_t query_count = 64;
  enc::RetrievalMode retrieval = enc::RetrievalMode::text_to_text;
};

Json analyze_corpus(const AnalyzeOptions& opts);

}  // namespace mflab::harness
