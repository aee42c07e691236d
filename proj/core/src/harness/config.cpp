#include "mflab/harness/config.hpp"

#include <algorithm>
#include <initializer_list>

#include "mflab/errors.hpp"

namespace mflab::harness {

namespace {

void reject_unknown(const Json& j, const std::string& where, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return key == k; });
    if (!ok) throw ValidationError("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Json task_to_json(const TaskSpec& t) {
  return Json{{"kind", std::string(to_string(t.kind))},
              {"gaussian", {{"mean", t.gaussian.mean}, {"std", t.gaussian.std}}},
              {"mixture",
               {{"n_attributes", t.mixture.n_attributes},
                {"values_per_attribute", t.mixture.values_per_attribute},
                {"data_dim", t.mixture.data_dim},
                {"spacing", t.mixture.spacing},
                {"component_std", t.mixture.component_std}}},
              {"held_out", t.held_out}};
}

TaskSpec task_from_json(const Json& j) {
  reject_unknown(j, "task", {"kind", "gaussian", "mixture", "held_out"});
  TaskSpec t;
  if (j.contains("kind")) t.kind = parse_task_kind(j.at("kind").get<std::string>());
  if (j.contains("gaussian")) {
    const Json& g = j.at("gaussian");
    reject_unknown(g, "task.gaussian", {"mean", "std"});
    read(g, "mean", t.gaussian.mean);
    read(g, "std", t.gaussian.std);
  }
  if (j.contains("mixture")) {
    const Json& m = j.at("mixture");
    reject_unknown(m, "task.mixture", {"n_attributes", "values_per_attribute", "data_dim", "spacing", "component_std"});
    read(m, "n_attributes", t.mixture.n_attributes);
    read(m, "values_per_attribute", t.mixture.values_per_attribute);
    read(m, "data_dim", t.mixture.data_dim);
    read(m, "spacing", t.mixture.spacing);
    read(m, "component_std", t.mixture.component_std);
  }
  read(j, "held_out", t.held_out);
  return t;
}

Json embedding_to_json(const EmbeddingSpec& e) {
  const auto& s = e.synthetic;
  return Json{{"synthetic",
               {{"n_attributes", s.n_attributes},
                {"values_per_attribute", s.values_per_attribute},
                {"dim", s.dim},
                {"separation", s.separation},
                {"mode", std::string(enc::to_string(s.mode))},
                {"tokens_per_attribute", s.tokens_per_attribute}}},
              {"corpus_path", e.corpus_path}};
}

EmbeddingSpec embedding_from_json(const Json& j) {
  reject_unknown(j, "embedding", {"synthetic", "corpus_path"});
  EmbeddingSpec e;
  if (j.contains("synthetic")) {
    const Json& s = j.at("synthetic");
    reject_unknown(s, "embedding.synthetic",
                   {"n_attributes", "values_per_attribute", "dim", "separation", "mode", "tokens_per_attribute"});
    read(s, "n_attributes", e.synthetic.n_attributes);
    read(s, "values_per_attribute", e.synthetic.values_per_attribute);
    read(s, "dim", e.synthetic.dim);
    read(s, "separation", e.synthetic.separation);
    if (s.contains("mode")) e.synthetic.mode = enc::parse_embed_mode(s.at("mode").get<std::string>());
    read(s, "tokens_per_attribute", e.synthetic.tokens_per_attribute);
  }
  read(j, "corpus_path", e.corpus_path);
  return e;
}

Json schedule_to_json(const flow::ScheduleConfig& s) {
  return Json{{"family", std::string(flow::to_string(s.family))},
              {"mu_start", s.mu_start},
              {"mu_end", s.mu_end},
              {"sigma_start", s.sigma_start},
              {"sigma_end", s.sigma_end},
              {"neq_ratio_start", s.neq_ratio_start},
              {"neq_ratio_end", s.neq_ratio_end}};
}

flow::ScheduleConfig schedule_from_json(const Json& j) {
  reject_unknown(j, "schedule",
                 {"family", "mu_start", "mu_end", "sigma_start", "sigma_end", "neq_ratio_start", "neq_ratio_end"});
  flow::ScheduleConfig s;
  if (j.contains("family")) s.family = flow::parse_time_family(j.at("family").get<std::string>());
  read(j, "mu_start", s.mu_start);
  read(j, "mu_end", s.mu_end);
  read(j, "sigma_start", s.sigma_start);
  read(j, "sigma_end", s.sigma_end);
  read(j, "neq_ratio_start", s.neq_ratio_start);
  read(j, "neq_ratio_end", s.neq_ratio_end);
  return s;
}

}  // namespace

std::string_view to_string(TaskKind kind) { return kind == TaskKind::gaussian ? "gaussian" : "mixture"; }

TaskKind parse_task_kind(std::string_view text) {
  if (text == "gaussian") return TaskKind::gaussian;
  if (text == "mixture") return TaskKind::mixture;
  throw ValidationError("unknown task kind '" + std::string(text) + "' (expected gaussian or mixture)");
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw ValidationError("config: name must not be empty");
  if (task.kind == TaskKind::gaussian) {
    task.gaussian.validate();
    if (!task.held_out.empty()) throw ValidationError("config: held_out applies to mixture tasks only");
  } else {
    task.mixture.validate();
    const auto ids = task.mixture.condition_ids();
    for (const auto& id : task.held_out)
      if (std::find(ids.begin(), ids.end(), id) == ids.end())
        throw ValidationError("config: held-out condition '" + id + "' is not part of the mixture layout");
    if (task.held_out.size() >= ids.size()) throw ValidationError("config: every condition is held out");
    if (embedding.corpus_path.empty() &&
        (embedding.synthetic.n_attributes != task.mixture.n_attributes ||
         embedding.synthetic.values_per_attribute != task.mixture.values_per_attribute))
      throw ValidationError("config: synthetic embedding layout must match the mixture layout");
  }
  embedding.synthetic.validate();
  time_embed.validate();
  schedule.validate();
  if (hidden_dim == 0 || depth == 0) throw ValidationError("config: hidden_dim and depth must be positive");
  if (!(adam.lr > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
      !(adam.eps > 0.0))
    throw ValidationError("config: invalid optimizer settings");
  if (lr_decay != "constant" && lr_decay != "cosine")
    throw ValidationError("config: adam.decay must be 'constant' or 'cosine'");
  if (batch_size == 0) throw ValidationError("config: batch_size must be positive");
  if (fm_steps < 0 || mf_steps < 0) throw ValidationError("config: step counts must be non-negative");
  if (checkpoint_every <= 0 || eval.every <= 0) throw ValidationError("config: cadences must be positive");
  if (eval.samples_per_condition == 0 || eval.steps.empty())
    throw ValidationError("config: evaluation needs samples and at least one step count");
  for (std::size_t s : eval.steps)
    if (s == 0) throw ValidationError("config: evaluation step counts must be positive");
  if (velocity_source != "pretrained" && velocity_source != "conditional")
    throw ValidationError("config: velocity_source must be 'pretrained' or 'conditional'");
  if (dataset_per_condition == 0) throw ValidationError("config: dataset_per_condition must be positive");
}

Json ExperimentConfig::to_json() const {
  return Json{{"name", name},
              {"task", task_to_json(task)},
              {"embedding", embedding_to_json(embedding)},
              {"net", {{"hidden_dim", hidden_dim}, {"depth", depth}}},
              {"time_embed",
               {{"feature_dim", time_embed.feature_dim},
                {"min_freq", time_embed.min_freq},
                {"max_freq", time_embed.max_freq}}},
              {"schedule", schedule_to_json(schedule)},
              {"adam",
               {{"lr", adam.lr}, {"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}, {"decay", lr_decay}}},
              {"batch_size", batch_size},
              {"fm_steps", fm_steps},
              {"mf_steps", mf_steps},
              {"checkpoint_every", checkpoint_every},
              {"eval",
               {{"every", eval.every}, {"samples_per_condition", eval.samples_per_condition}, {"steps", eval.steps}}},
              {"velocity_source", velocity_source},
              {"dataset_per_condition", dataset_per_condition},
              {"seed", seed},
              {"out_dir", out_dir}};
}

Json ExperimentConfig::content_json() const {
  Json j = to_json();
  j.erase("out_dir");
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  try {
    reject_unknown(j, "config",
                   {"name", "task", "embedding", "net", "time_embed", "schedule", "adam", "batch_size", "fm_steps",
                    "mf_steps", "checkpoint_every", "eval", "velocity_source", "dataset_per_condition", "seed",
                    "out_dir"});
    ExperimentConfig c;
    read(j, "name", c.name);
    if (j.contains("task")) c.task = task_from_json(j.at("task"));
    if (j.contains("embedding")) c.embedding = embedding_from_json(j.at("embedding"));
    if (j.contains("net")) {
      const Json& n = j.at("net");
      reject_unknown(n, "net", {"hidden_dim", "depth"});
      read(n, "hidden_dim", c.hidden_dim);
      read(n, "depth", c.depth);
    }
    if (j.contains("time_embed")) {
      const Json& t = j.at("time_embed");
      reject_unknown(t, "time_embed", {"feature_dim", "min_freq", "max_freq"});
      read(t, "feature_dim", c.time_embed.feature_dim);
      read(t, "min_freq", c.time_embed.min_freq);
      read(t, "max_freq", c.time_embed.max_freq);
    }
    if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
    if (j.contains("adam")) {
      const Json& a = j.at("adam");
      reject_unknown(a, "adam", {"lr", "beta1", "beta2", "eps", "decay"});
      read(a, "lr", c.adam.lr);
      read(a, "beta1", c.adam.beta1);
      read(a, "beta2", c.adam.beta2);
      read(a, "eps", c.adam.eps);
      read(a, "decay", c.lr_decay);
    }
    read(j, "batch_size", c.batch_size);
    read(j, "fm_steps", c.fm_steps);
    read(j, "mf_steps", c.mf_steps);
    read(j, "checkpoint_every", c.checkpoint_every);
    if (j.contains("eval")) {
      const Json& e = j.at("eval");
      reject_unknown(e, "eval", {"every", "samples_per_condition", "steps"});
      read(e, "every", c.eval.every);
      read(e, "samples_per_condition", c.eval.samples_per_condition);
      read(e, "steps", c.eval.steps);
    }
    read(j, "velocity_source", c.velocity_source);
    read(j, "dataset_per_condition", c.dataset_per_condition);
    read(j, "seed", c.seed);
    read(j, "out_dir", c.out_dir);
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) { return ExperimentConfig::from_json(read_json_file(path)); }

}  // namespace mflab::harness
