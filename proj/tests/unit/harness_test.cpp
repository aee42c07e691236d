#include <gtest/gtest.h>

#include <cmath>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "mflab/enc/corpus.hpp"
#include "mflab/enc/synthetic.hpp"
#include "mflab/errors.hpp"
#include "mflab/harness/commands.hpp"
#include "mflab/harness/experiments.hpp"
#include "mflab/harness/task_data.hpp"
#include "mflab/harness/training.hpp"
#include "test_support.hpp"

namespace mflab::harness {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

ExperimentConfig tiny_config(const fs::path& out, TaskKind kind = TaskKind::mixture) {
  ExperimentConfig cfg;
  cfg.name = "tiny";
  cfg.task.kind = kind;
  cfg.hidden_dim = 16;
  cfg.depth = 2;
  cfg.time_embed = net::TimeEmbedConfig{8, 1.0, 10.0};
  cfg.batch_size = 32;
  cfg.fm_steps = 40;
  cfg.mf_steps = 20;
  cfg.checkpoint_every = 20;
  cfg.eval.every = 20;
  cfg.eval.samples_per_condition = 50;
  cfg.dataset_per_condition = 100;
  cfg.seed = 5;
  cfg.out_dir = out.string();
  return cfg;
}

TEST(TaskData, MixtureConditionsAndHeldOut) {
  TempDir dir("task");
  ExperimentConfig cfg = tiny_config(dir.path());
  cfg.task.mixture.values_per_attribute = 3;
  cfg.embedding.synthetic.values_per_attribute = 3;
  cfg.task.held_out = {"c1_1"};
  const TaskData data(cfg);
  ASSERT_EQ(data.conditions().size(), 9u);
  EXPECT_EQ(data.training_conditions().size(), 8u);
  EXPECT_FALSE(data.conditions()[data.index_of("c1_1")].trained);
  EXPECT_THROW(data.index_of("c7_7"), ValidationError);
  num::Rng rng(1);
  const flow::TrainBatch b = data.draw_batch(200, rng, 0.5, cfg.schedule, true);
  const Tensor held = data.conditions()[data.index_of("c1_1")].psi;
  for (std::size_t i = 0; i < b.psi.rows(); ++i) {
    bool same = true;
    for (std::size_t j = 0; j < b.psi.cols(); ++j) same = same && b.psi.at(i, j) == held[j];
    EXPECT_FALSE(same) << "held-out condition drawn in row " << i;
    EXPECT_GE(b.t[i], b.r[i]);
  }
}

TEST(GenData, DeterministicAcrossOutputDirs) {
  TempDir a("gen_a"), b("gen_b");
  const Json ma = gen_data(tiny_config(a.path()));
  const Json mb = gen_data(tiny_config(b.path()));
  EXPECT_EQ(ma, mb);
  for (const char* f : {"dataset.jsonl", "embeddings.json", "corpus.jsonl", "manifest.json"})
    EXPECT_EQ(read_text_file(a / "data" / f), read_text_file(b / "data" / f)) << f;
}

TEST(GenData, ThreeByThreeManifestListsNineIds) {
  TempDir dir("gen3");
  ExperimentConfig cfg = tiny_config(dir.path());
  cfg.task.mixture.values_per_attribute = 3;
  cfg.embedding.synthetic.values_per_attribute = 3;
  const Json m = gen_data(cfg);
  ASSERT_EQ(m.at("conditions").size(), 9u);
  EXPECT_EQ(m.at("config_digest"), config_digest(cfg));
  EXPECT_EQ(read_json_file(dir / "data" / "manifest.json"), m);
  const SampleSet ds = load_sample_set(dir / "data" / "dataset.jsonl");
  EXPECT_EQ(ds.records.size(), 9u * cfg.dataset_per_condition);
  EXPECT_EQ(ds.config_digest, config_digest(cfg));
}

TEST(GenData, GaussianMeanWithinClt) {
  TempDir dir("gen_gauss");
  ExperimentConfig cfg = tiny_config(dir.path(), TaskKind::gaussian);
  cfg.task.gaussian = flow::GaussianTask{{1.0, -0.5}, 0.7};
  cfg.dataset_per_condition = 10000;
  gen_data(cfg);
  const SampleSet ds = load_sample_set(dir / "data" / "dataset.jsonl");
  ASSERT_EQ(ds.records.size(), 10000u);
  for (std::size_t j = 0; j < 2; ++j) {
    double m = 0.0;
    for (const auto& r : ds.records) m += r.x[j];
    m /= 10000.0;
    EXPECT_LT(std::abs(m - cfg.task.gaussian.mean[j]), 4 * 0.7 / std::sqrt(10000.0));
  }
}

TEST(Train, WritesCheckpointsAndMetrics) {
  TempDir dir("train");
  const ExperimentConfig cfg = tiny_config(dir.path());
  TrainOptions fm;
  fm.mode = net::NetMode::fm;
  const TrainOutcome out = train(cfg, fm);
  const fs::path run = dir / "fm";
  EXPECT_TRUE(fs::exists(run / "step_00000020.json"));
  EXPECT_TRUE(fs::exists(run / "step_00000040.json"));
  EXPECT_EQ(out.latest_checkpoint, run / "latest.json");
  std::string digest;
  const auto rows = parse_metrics_csv(read_text_file(run / "metrics.csv"), &digest);
  EXPECT_EQ(digest, config_digest(cfg));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].step, 40);
  EXPECT_EQ(rows[1].fidelity.size(), 3u);
  EXPECT_TRUE(rows[1].energy_distance.has_value());
  EXPECT_TRUE(rows[1].curvature.has_value());

  TrainOptions mf;
  mf.mode = net::NetMode::mf;
  EXPECT_THROW(train(cfg, mf), ValidationError);
  mf.init_from = out.latest_checkpoint;
  const TrainOutcome mf_out = train(cfg, mf);
  EXPECT_EQ(mf_out.net.mode(), net::NetMode::mf);
  EXPECT_EQ(net::load_checkpoint(mf_out.latest_checkpoint).meta.step, 20);
}

TEST(Train, InitFromRejectsMfCheckpoint) {
  TempDir dir("train_init");
  ExperimentConfig cfg = tiny_config(dir.path());
  cfg.velocity_source = "conditional";
  TrainOptions mf;
  mf.mode = net::NetMode::mf;
  const TrainOutcome out = train(cfg, mf);
  mf.init_from = out.latest_checkpoint;
  EXPECT_THROW(train(cfg, mf), ValidationError);
}

TEST(Train, ResumeMatchesUninterruptedRun) {
  TempDir a("resume_a"), b("resume_b");
  TrainOptions opts;
  opts.mode = net::NetMode::fm;
  auto config = [](const fs::path& out) {
    ExperimentConfig cfg = tiny_config(out);
    cfg.lr_decay = "cosine";
    return cfg;
  };
  train(config(a.path()), opts);

  // Crash after the step-40 evaluation but before its checkpoint lands.
  TrainOptions crashing = opts;
  crashing.log = [](const std::string& msg) {
    if (msg.find("step 40 ") != std::string::npos) throw std::runtime_error("simulated crash");
  };
  EXPECT_THROW(train(config(b.path()), crashing), std::runtime_error);
  EXPECT_EQ(net::load_checkpoint(b / "fm" / "latest.json").meta.step, 20);

  TrainOptions resume = opts;
  resume.resume = true;
  train(config(b.path()), resume);
  for (const char* f : {"latest.json", "step_00000040.json", "metrics.csv"})
    EXPECT_EQ(read_text_file(a / "fm" / f), read_text_file(b / "fm" / f)) << f;
}

TEST(Train, ResumeRejectsDifferentConfig) {
  TempDir dir("resume_cfg");
  TrainOptions opts;
  opts.mode = net::NetMode::fm;
  train(tiny_config(dir.path()), opts);
  ExperimentConfig other = tiny_config(dir.path());
  other.adam.lr = 5e-4;
  opts.resume = true;
  EXPECT_THROW(train(other, opts), ValidationError);
}

TEST(Train, DivergenceKeepsLastGoodCheckpoint) {
  TempDir dir("nan");
  ExperimentConfig cfg = tiny_config(dir.path());
  cfg.adam.lr = 1e200;
  TrainOptions opts;
  opts.mode = net::NetMode::fm;
  try {
    train(cfg, opts);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(exit_code_for(e), kExitNumeric);
  }
  ASSERT_TRUE(fs::exists(dir / "fm" / "last_good.json"));
  const net::Checkpoint ck = net::load_checkpoint(dir / "fm" / "last_good.json");
  for (const auto& [name, t] : ck.params) EXPECT_TRUE(t.all_finite()) << name;
}

class TrainedFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("trained");
    cfg_ = new ExperimentConfig(tiny_config(dir_->path()));
    gen_data(*cfg_);
    TrainOptions fm;
    fm.mode = net::NetMode::fm;
    const TrainOutcome out = train(*cfg_, fm);
    TrainOptions mf;
    mf.mode = net::NetMode::mf;
    mf.init_from = out.latest_checkpoint;
    train(*cfg_, mf);
  }
  static void TearDownTestSuite() {
    delete cfg_;
    delete dir_;
  }
  static fs::path mf_ckpt() { return dir_->path() / "mf" / "latest.json"; }
  static fs::path dataset() { return dir_->path() / "data" / "dataset.jsonl"; }

  static TempDir* dir_;
  static ExperimentConfig* cfg_;
};

TempDir* TrainedFixture::dir_ = nullptr;
ExperimentConfig* TrainedFixture::cfg_ = nullptr;

TEST_F(TrainedFixture, SampleStepCountsShareNoise) {
  SampleOptions o;
  o.checkpoint = mf_ckpt();
  o.n = 20;
  o.record_paths = true;
  o.steps = 1;
  const SampleSet one = sample_checkpoint(o);
  o.steps = 4;
  const SampleSet four = sample_checkpoint(o);
  ASSERT_EQ(one.records.size(), four.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    EXPECT_EQ(one.records[i].path.front(), four.records[i].path.front());
    EXPECT_EQ(four.records[i].path.size(), 5u);
  }
  EXPECT_EQ(one.config_digest, config_digest(*cfg_));
}

TEST_F(TrainedFixture, SampleRejectsUnknownCondition) {
  SampleOptions o;
  o.checkpoint = mf_ckpt();
  o.conditions = {"c0_0", "c5_5"};
  try {
    sample_checkpoint(o);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("c5_5"), std::string::npos);
  }
}

TEST_F(TrainedFixture, EvalOfDatasetAgainstItselfIsExact) {
  SampleSet self = load_sample_set(dataset());
  self.kind = "samples";
  TempDir tmp("eval_self");
  save_sample_set(self, tmp / "samples.jsonl");
  const Json report = evaluate_samples(EvalOptions{tmp / "samples.jsonl", dataset(), false});
  EXPECT_EQ(report.at("energy_distance").get<double>(), 0.0);
  const sample::FidelityReport parsed = sample::FidelityReport::from_json(Json::parse(report.dump()));
  EXPECT_EQ(parsed.energy_distance, std::optional<double>(0.0));
  EXPECT_GT(parsed.overall, 0.95);
  EXPECT_EQ(parsed.to_json().at("per_condition"), report.at("per_condition"));
}

TEST_F(TrainedFixture, EvalChecksDigests) {
  SampleOptions o;
  o.checkpoint = mf_ckpt();
  o.n = 30;
  SampleSet s = sample_checkpoint(o);
  s.config_digest = std::string(64, '0');
  TempDir tmp("eval_digest");
  save_sample_set(s, tmp / "samples.jsonl");
  EXPECT_THROW(evaluate_samples(EvalOptions{tmp / "samples.jsonl", dataset(), false}), ValidationError);
  const Json forced = evaluate_samples(EvalOptions{tmp / "samples.jsonl", dataset(), true});
  EXPECT_GE(forced.at("energy_distance").get<double>(), 0.0);
}

TEST_F(TrainedFixture, EvalReportsCurvatureForPaths) {
  SampleOptions o;
  o.checkpoint = dir_->path() / "fm" / "latest.json";
  o.n = 30;
  o.steps = 4;
  o.record_paths = true;
  TempDir tmp("eval_paths");
  save_sample_set(sample_checkpoint(o), tmp / "samples.jsonl");
  const Json report = evaluate_samples(EvalOptions{tmp / "samples.jsonl", dataset(), false});
  EXPECT_FALSE(report.at("curvature").is_null());
  EXPECT_EQ(report.at("steps"), 4);
}

fs::path write_corpus(const TempDir& dir, const std::string& name, double separation) {
  enc::SyntheticEmbedSpec spec;
  spec.values_per_attribute = 3;
  spec.separation = separation;
  const enc::Corpus corpus = enc::synthetic_corpus(enc::gen_synthetic_embeddings(spec, 1), {}, 2);
  enc::save_corpus(corpus, dir / name);
  return dir / name;
}

TEST(Analyze, DiscriminabilityGrowsWithSeparation) {
  TempDir dir("analyze");
  AnalyzeOptions o;
  o.metric = "discriminability";
  o.corpus = write_corpus(dir, "wide.jsonl", 4.0);
  const double wide = analyze_corpus(o).at("score").get<double>();
  o.corpus = write_corpus(dir, "narrow.jsonl", 0.5);
  const double narrow = analyze_corpus(o).at("score").get<double>();
  EXPECT_GT(wide, narrow);
  o.metric = "sparsity";
  EXPECT_THROW(analyze_corpus(o), ValidationError);
}

TEST(Analyze, IdenticalTokenCorpusIsFullyDisentangled) {
  TempDir dir("analyze_same");
  num::Rng rng(3);
  std::vector<enc::EmbeddingRecord> records;
  for (int i = 0; i < 12; ++i) {
    enc::EmbeddingRecord r;
    r.id = "p" + std::to_string(i);
    r.token_embeddings = num::repeat_row(rng.normal_tensor({1, 5}), 6);
    records.push_back(std::move(r));
  }
  enc::save_corpus(enc::Corpus(records), dir / "same.jsonl");
  AnalyzeOptions o;
  o.metric = "disentanglement";
  o.corpus = dir / "same.jsonl";
  const Json j = analyze_corpus(o);
  EXPECT_NEAR(j.at("score").get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j.at("corpus_digest"), sha256_hex(read_text_file(o.corpus)));
}

TEST(Repro, UnknownRecipeListsAvailable) {
  try {
    run_recipe("fig9", RecipeOptions{});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    for (const auto& name : recipe_names()) EXPECT_NE(msg.find(name), std::string::npos) << name;
  }
}

TEST(Repro, GaussianProbeOfZeroField) {
  // A probe helper sanity check: an untrained net is the zero field, so the
  // RMSE equals the RMS of the analytic velocity itself.
  num::Rng rng(4);
  const net::VelocityNet zero =
      net::VelocityNet::init(net::NetDims{2, 1, 8, 1}, net::TimeEmbedConfig{8, 1.0, 10.0}, net::NetMode::fm, rng);
  const flow::GaussianTask task{{0.0, 0.0}, 1.0};
  // With std 1 and zero mean the velocity at t is (2t - 1) / s_t^2 * z, which vanishes at t = 1/2.
  EXPECT_NEAR(gaussian_velocity_rmse(zero, task, Tensor::full(1, 1, 0.0), {0.5}), 0.0, 1e-12);
  EXPECT_GT(gaussian_velocity_rmse(zero, task, Tensor::full(1, 1, 0.0), {0.0}), 1.0);
}

#ifdef MFLAB_CLI_PATH
int run_cli(const std::string& args) {
  const int status = std::system((std::string(MFLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  EXPECT_EQ(run_cli("repro no-such-recipe"), kExitValidation);
  ExperimentConfig cfg = tiny_config(dir / "run");
  write_json_file(dir / "ok.json", cfg.to_json());
  EXPECT_EQ(run_cli("gen-data --config " + (dir / "ok.json").string()), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "run" / "data" / "manifest.json"));
  const std::string corpus = (dir / "run" / "data" / "corpus.jsonl").string();
  EXPECT_EQ(run_cli("analyze " + corpus + " --metric discriminability"), kExitOk);
  EXPECT_EQ(run_cli("analyze " + corpus + " --metric disentanglement"), kExitOk);
  EXPECT_EQ(run_cli("analyze " + corpus + " --metric recall"), kExitValidation);
  Json bad = cfg.to_json();
  bad["bogus"] = 1;
  write_json_file(dir / "bad.json", bad);
  EXPECT_EQ(run_cli("gen-data --config " + (dir / "bad.json").string()), kExitValidation);
  cfg.adam.lr = 1e200;
  write_json_file(dir / "nan.json", cfg.to_json());
  EXPECT_EQ(run_cli("train --mode fm --config " + (dir / "nan.json").string()), kExitNumeric);
}
#endif

}  // namespace
}  // namespace mflab::harness
