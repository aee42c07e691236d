#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mflab/enc/synthetic.hpp"
#include "mflab/flow/schedule.hpp"
#include "mflab/flow/tasks.hpp"
#include "mflab/json_io.hpp"
#include "mflab/net/velocity_net.hpp"
#include "mflab/num/adam.hpp"

namespace mflab::harness {

using num::Tensor;

enum class TaskKind { gaussian, mixture };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

struct TaskSpec {
  TaskKind kind = TaskKind::mixture;
  flow::GaussianTask gaussian{{0.0, 0.0}, 1.0};
  flow::CompositionalMixture mixture;
  // Mixture condition ids that are never drawn during training but are still
  // sampled and scored at evaluation time.
  std::vector<std::string> held_out;
};

struct EmbeddingSpec {
  enc::SyntheticEmbedSpec synthetic;
  // When set, the condition embedding of id c is the pooled text embedding of
  // the corpus record whose id is c; otherwise the synthetic table is used.
  std::string corpus_path;
};

struct EvalConfig {
  std::int64_t every = 500;
  std::size_t samples_per_condition = 2000;
  std::vector<std::size_t> steps{1, 2, 4};
};

/// Everything that determines an experiment's numbers. The output directory is
/// the only field excluded from the config digest.
struct ExperimentConfig {
  std::string name = "experiment";
  TaskSpec task;
  EmbeddingSpec embedding;
  std::size_t hidden_dim = 64;
  std::size_t depth = 3;
  net::TimeEmbedConfig time_embed{32, 1.0, 10.0};
  flow::ScheduleConfig schedule;
  num::AdamConfig adam;
  std::string lr_decay = "constant";  // constant | cosine (to zero over the run)
  std::size_t batch_size = 256;
  std::int64_t fm_steps = 3000;
  std::int64_t mf_steps = 8000;
  std::int64_t checkpoint_every = 1000;
  EvalConfig eval;
  std::string velocity_source = "pretrained";  // pretrained | conditional
  std::size_t dataset_per_condition = 5000;
  std::uint64_t seed = 0;
  std::string out_dir = "runs/experiment";

  void validate() const;
  Json to_json() const;
  // to_json without out_dir: what artifacts embed and what the digest covers.
  Json content_json() const;
  // Fields absent from `j` keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const Json& j);
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// Hex SHA-256 of the canonical (sorted-key, compact) JSON of the config
/// without its output directory.
std::string config_digest(const ExperimentConfig& cfg);
std::string sha256_hex(const std::string& bytes);

}  // namespace mflab::harness
