#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mflab/enc/synthetic.hpp"
#include "mflab/flow/meanflow.hpp"
#include "mflab/harness/config.hpp"

namespace mflab::harness {

struct ConditionEntry {
  std::string id;
  Tensor psi;  // 1 x cond_dim
  bool trained = true;
};

/// The data side of an experiment: conditions with their embeddings, a sampler
/// for each condition's data distribution, and minibatch assembly. A Gaussian
/// task exposes a single condition "c0" whose embedding is all zeros.
class TaskData {
 public:
  explicit TaskData(const ExperimentConfig& cfg);

  bool is_mixture() const noexcept { return task_.kind == TaskKind::mixture; }
  const TaskSpec& task() const noexcept { return task_; }
  const flow::CompositionalMixture& layout() const;
  std::size_t data_dim() const noexcept { return data_dim_; }
  std::size_t cond_dim() const noexcept { return cond_dim_; }
  net::NetDims net_dims(const ExperimentConfig& cfg) const;

  const std::vector<ConditionEntry>& conditions() const noexcept { return conditions_; }
  const std::vector<std::size_t>& training_conditions() const noexcept { return train_idx_; }
  // Throws ValidationError naming the id when it is not a condition of this task.
  std::size_t index_of(const std::string& id) const;
  const std::optional<enc::ConditionTable>& table() const noexcept { return table_; }

  Tensor sample(std::size_t condition, std::size_t n, num::Rng& rng) const;

  /// B rows with uniformly drawn training conditions. With `pairs`, (t, r)
  /// comes from sample_timepair; otherwise r = t from sample_time.
  flow::TrainBatch draw_batch(std::size_t batch, num::Rng& rng, double progress, const flow::ScheduleConfig& sched,
                              bool pairs) const;

 private:
  TaskSpec task_;
  std::size_t data_dim_ = 0;
  std::size_t cond_dim_ = 0;
  std::vector<ConditionEntry> conditions_;
  std::vector<ConditionTuple> tuples_;
  std::vector<std::size_t> train_idx_;
  std::optional<enc::ConditionTable> table_;
};

}  // namespace mflab::harness
