#include "mflab/harness/commands.hpp"

#include <algorithm>

#include "mflab/enc/analysis.hpp"
#include "mflab/errors.hpp"
#include "mflab/harness/streams.hpp"

namespace mflab::harness {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  return kExitValidation;
}

ExperimentConfig resolve_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed,
                                const std::optional<std::string>& out) {
  ExperimentConfig cfg = load_config(path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.out_dir = *out;
  cfg.validate();
  return cfg;
}

Json gen_data(const ExperimentConfig& cfg) {
  const TaskData data(cfg);
  const std::string digest = config_digest(cfg);
  const auto dir = std::filesystem::path(cfg.out_dir) / "data";
  std::filesystem::create_directories(dir);

  SampleSet set;
  set.kind = "dataset";
  set.config_digest = digest;
  set.config = cfg.content_json();
  set.data_dim = data.data_dim();
  Json ids = Json::array();
  for (std::size_t c = 0; c < data.conditions().size(); ++c) {
    num::Rng rng = stream_rng(cfg.seed, Stream::dataset).split(c);
    set.append(data.conditions()[c].id, data.sample(c, cfg.dataset_per_condition, rng));
    ids.push_back(data.conditions()[c].id);
  }
  save_sample_set(set, dir / "dataset.jsonl");

  Json files{{"dataset", "dataset.jsonl"}};
  if (data.table()) {
    Json table = data.table()->to_json();
    table["config_digest"] = digest;
    write_json_file(dir / "embeddings.json", table);
    files["embeddings"] = "embeddings.json";
    const enc::Corpus corpus =
        enc::synthetic_corpus(*data.table(), enc::SyntheticCorpusSpec{}, stream_seed(cfg.seed, Stream::corpus));
    enc::save_corpus(corpus, dir / "corpus.jsonl");
    files["corpus"] = "corpus.jsonl";
  }
  const Json manifest{{"format", "mflab.manifest"},
                      {"version", 1},
                      {"config_digest", digest},
                      {"seed", cfg.seed},
                      {"task", std::string(to_string(cfg.task.kind))},
                      {"conditions", ids},
                      {"held_out", cfg.task.held_out},
                      {"points_per_condition", cfg.dataset_per_condition},
                      {"files", files},
                      {"config", cfg.content_json()}};
  write_json_file(dir / "manifest.json", manifest);
  return manifest;
}

SampleSet sample_checkpoint(const SampleOptions& opts) {
  if (opts.steps == 0) throw ValidationError("sample: --steps must be positive");
  if (opts.n == 0) throw ValidationError("sample: -N must be positive");
  const net::Checkpoint ck = net::load_checkpoint(opts.checkpoint);
  if (ck.meta.config.empty()) throw ValidationError("sample: checkpoint carries no experiment config");
  const ExperimentConfig cfg = ExperimentConfig::from_json(ck.meta.config);
  const TaskData data(cfg);
  const net::VelocityNet net = net::net_from_checkpoint(ck);
  const net::NetMode mode = opts.as.value_or(ck.mode);
  const std::uint64_t seed = opts.seed.value_or(ck.meta.seed);

  std::vector<std::size_t> which;
  if (opts.conditions.empty()) {
    for (std::size_t c = 0; c < data.conditions().size(); ++c) which.push_back(c);
  } else {
    for (const auto& id : opts.conditions) which.push_back(data.index_of(id));
  }

  SampleSet set;
  set.kind = "samples";
  set.config_digest = ck.meta.config_digest;
  set.config = ck.meta.config;
  set.data_dim = data.data_dim();
  set.steps = opts.steps;
  for (std::size_t c : which) {
    num::Rng rng = stream_rng(seed, Stream::sampling).split(c);
    const Tensor& psi = data.conditions()[c].psi;
    const sample::SampleRun run = mode == net::NetMode::mf
                                      ? sample::meanflow_sample(net, psi, opts.steps, rng, opts.n, opts.record_paths)
                                      : sample::fm_euler_sample(net, psi, opts.steps, rng, opts.n, opts.record_paths);
    set.append(data.conditions()[c].id, run);
  }
  return set;
}

Json evaluate_samples(const EvalOptions& opts) {
  const SampleSet samples = load_sample_set(opts.samples);
  const SampleSet dataset = load_sample_set(opts.dataset);
  if (dataset.kind != "dataset") throw ValidationError("eval: " + opts.dataset.string() + " is not a dataset file");
  if (samples.config_digest != dataset.config_digest && !opts.force_digest)
    throw ValidationError("eval: config digest mismatch (samples " + samples.config_digest + ", dataset " +
                          dataset.config_digest + "); pass --force-digest to compare anyway");
  if (samples.data_dim != dataset.data_dim)
    throw ShapeError("eval: samples are " + std::to_string(samples.data_dim) + "-d but the dataset is " +
                     std::to_string(dataset.data_dim) + "-d");

  const auto groups = group_by_condition(samples);
  const auto reference = group_by_condition(dataset);
  sample::FidelityReport report;
  double ed = 0.0;
  for (const auto& g : groups) {
    auto it = std::find_if(reference.begin(), reference.end(),
                           [&](const auto& r) { return r.condition_id == g.condition_id; });
    if (it == reference.end()) throw ValidationError("eval: dataset has no points for condition '" + g.condition_id + "'");
    ed += sample::energy_distance(g.samples, it->samples);
  }
  if (!groups.empty()) report.energy_distance = ed / static_cast<double>(groups.size());

  const ExperimentConfig cfg = ExperimentConfig::from_json(dataset.config);
  if (cfg.task.kind == TaskKind::mixture) {
    const sample::FidelityReport fid = sample::condition_fidelity(groups, cfg.task.mixture);
    report.per_condition = fid.per_condition;
    report.overall = fid.overall;
  }
  if (samples.has_paths()) {
    double curv = 0.0;
    const auto runs = trajectories_by_condition(samples);
    for (const auto& [id, run] : runs) curv += sample::trajectory_curvature(run).mean;
    report.curvature = curv / static_cast<double>(runs.size());
  }
  Json j = report.to_json();
  j["config_digest"] = samples.config_digest;
  j["dataset_digest"] = dataset.config_digest;
  j["steps"] = samples.steps ? Json(*samples.steps) : Json(nullptr);
  j["task"] = std::string(to_string(cfg.task.kind));
  return j;
}

Json analyze_corpus(const AnalyzeOptions& opts) {
  const std::string content = read_text_file(opts.corpus);
  const enc::Corpus corpus = enc::parse_corpus_jsonl(content);
  enc::ScoreReport report;
  Json params;
  if (opts.metric == "discriminability") {
    if (opts.k == 0) throw ValidationError("analyze: --k must be positive");
    const auto queries = enc::select_queries(corpus, opts.query_count, opts.seed);
    report = enc::discriminability_score(corpus, queries, opts.k, opts.retrieval);
    params = Json{{"k", opts.k}, {"query_count", opts.query_count}, {"seed", opts.seed},
                  {"retrieval", std::string(enc::to_string(opts.retrieval))}};
  } else if (opts.metric == "disentanglement") {
    report = enc::disentanglement_score(corpus, opts.rho, opts.seed);
    params = Json{{"rho", opts.rho}, {"seed", opts.seed}};
  } else {
    throw ValidationError("analyze: unknown metric '" + opts.metric + "' (expected discriminability or disentanglement)");
  }
  Json j = report.to_json();
  j["metric"] = opts.metric;
  j["params"] = params;
  j["corpus_digest"] = sha256_hex(content);
  j["records"] = corpus.size();
  return j;
}

}  // namespace mflab::harness
