#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mflab/harness/config.hpp"
#include "mflab/harness/training.hpp"

namespace mflab::harness {

/// One thresholded comparison: passed is `value <relation> threshold`.
struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<", "<=", ">", ">="
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

Check make_check(std::string name, double value, std::string relation, double threshold, std::string detail = {});

struct RecipeResult {
  std::string recipe;
  std::vector<Check> checks;
  Json summary = Json::object();

  bool passed() const;
  // Checks whose name starts with `prefix`.
  std::vector<Check> checks_with_prefix(const std::string& prefix) const;
};

struct RecipeOptions {
  std::filesystem::path out_dir = "runs";
  std::optional<std::uint64_t> seed;
  LogFn log;
};

std::vector<std::string> recipe_names();
// Throws ValidationError listing the registered recipes for an unknown name.
// Writes <out>/<recipe>/summary.json.
RecipeResult run_recipe(const std::string& name, const RecipeOptions& opts);
std::string format_table(const RecipeResult& result);

// Configurations of the training recipes.
ExperimentConfig gaussian_oracle_config();
ExperimentConfig fig5_desk_config();
ExperimentConfig representation_config(enc::EmbedMode mode);

/// Autodiff, boundary-identity, linear stand-in, closed-form flow, schedule and
/// persistence checks. Needs no training.
RecipeResult oracle_suite(const RecipeOptions& opts);
/// FM pretraining then MF finetuning on a 2-D Gaussian; both fields are probed
/// against the analytic velocity and the RK4 average velocity.
RecipeResult gaussian_oracle(const RecipeOptions& opts);
/// 2x2 mixture with disentangled embeddings: MF at 1/2/4 steps against FM
/// Euler at 1 and 50 steps from the same pretraining.
RecipeResult fig5_desk(const RecipeOptions& opts);
/// Two runs that differ only in the embedding mode, on a 3x3 mixture whose
/// anti-diagonal combinations are held out of training.
RecipeResult representation_thesis(const RecipeOptions& opts);
/// Discriminability and disentanglement over synthetic corpora of decreasing
/// separation, for both embedding modes.
RecipeResult discriminability_ablation(const RecipeOptions& opts);

/// RMSE (Euclidean per point) of a velocity field against the analytic
/// marginal velocity on a 7x7 grid spanning +-3 marginal std at each t.
double gaussian_velocity_rmse(const net::VelocityNet& net, const flow::GaussianTask& task, const Tensor& psi,
                              const std::vector<double>& times);
/// Same grid, comparing forward_u(z, t, r) with the RK4 average velocity for
/// every (t, r = t - gap) on a 0.25-spaced t ladder.
double gaussian_average_velocity_rmse(const net::VelocityNet& net, const flow::GaussianTask& task, const Tensor& psi,
                                      const std::vector<double>& gaps);

}  // namespace mflab::harness
