#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mflab/errors.hpp"
#include "mflab/harness/config.hpp"
#include "mflab/harness/io.hpp"
#include "mflab/json_io.hpp"
#include "mflab/net/checkpoint.hpp"
#include "mflab/num/adam.hpp"
#include "test_support.hpp"

namespace mflab {
namespace {

using testing::TempDir;

TEST(TensorJson, DoublesSurviveBitwise) {
  num::Tensor t({2, 3});
  const double awkward[] = {0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23, std::nextafter(1.0, 2.0), -0.0};
  for (std::size_t i = 0; i < 6; ++i) t[i] = awkward[i];
  const num::Tensor back = tensor_from_json(Json::parse(tensor_to_json(t).dump()), "t");
  ASSERT_EQ(back.shape(), t.shape());
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(std::signbit(back[i]), std::signbit(t[i]));
  EXPECT_EQ(back, t);
  EXPECT_THROW(tensor_from_json(Json{{"shape", {2, 2}}, {"data", {1, 2, 3}}}, "bad"), ShapeError);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  num::Rng rng(1);
  net::VelocityNet net =
      net::VelocityNet::init(net::NetDims{2, 4, 8, 2}, net::TimeEmbedConfig{8, 1.0, 10.0}, net::NetMode::mf, rng);
  for (auto& [name, t] : net.params())
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += rng.normal() / 7.0;
  num::AdamState adam;
  num::Gradients g;
  for (const auto& [name, t] : net.params()) g[name] = rng.normal_tensor(t.shape());
  num::adam_step(net.params(), g, adam, num::AdamConfig{});

  net::TrainingMetadata meta;
  meta.step = 123;
  meta.seed = 99;
  meta.config_digest = "abc";
  meta.config = Json{{"name", "x"}};
  meta.run_state = Json{{"loss_window_sum", 0.1 + 0.2}};
  const net::Checkpoint ck = net::make_checkpoint(net, meta, adam);

  TempDir dir("ckpt");
  net::save_checkpoint(ck, dir / "a.json");
  const net::Checkpoint back = net::load_checkpoint(dir / "a.json");
  EXPECT_EQ(back.params, ck.params);
  EXPECT_EQ(back.dims, ck.dims);
  EXPECT_EQ(back.time_cfg, ck.time_cfg);
  EXPECT_EQ(back.mode, ck.mode);
  EXPECT_EQ(back.meta.step, 123);
  EXPECT_EQ(back.meta.run_state, meta.run_state);
  ASSERT_TRUE(back.optimizer.has_value());
  EXPECT_EQ(back.optimizer->m, adam.m);
  EXPECT_EQ(back.optimizer->v, adam.v);
  EXPECT_EQ(back.optimizer->step, adam.step);

  net::save_checkpoint(back, dir / "b.json");
  EXPECT_EQ(read_text_file(dir / "a.json"), read_text_file(dir / "b.json"));

  const net::VelocityNet restored = net::net_from_checkpoint(back);
  const num::Tensor z = rng.normal_tensor({5, 2});
  const num::Tensor psi = rng.normal_tensor({1, 4});
  EXPECT_EQ(restored.forward_u(z, 0.8, 0.3, psi), net.forward_u(z, 0.8, 0.3, psi));
}

TEST(Checkpoint, RejectsTamperedFiles) {
  num::Rng rng(2);
  const net::VelocityNet net =
      net::VelocityNet::init(net::NetDims{2, 4, 8, 1}, net::TimeEmbedConfig{8, 1.0, 10.0}, net::NetMode::fm, rng);
  Json j = net::checkpoint_to_json(net::make_checkpoint(net, {}));
  Json wrong_version = j;
  wrong_version["format_version"] = 999;
  EXPECT_THROW(net::checkpoint_from_json(wrong_version), ValidationError);
  Json missing = j;
  missing["params"].erase("trunk.0.weight");
  EXPECT_THROW(net::checkpoint_from_json(missing), ValidationError);
  TempDir dir("ckpt_bad");
  EXPECT_THROW(net::load_checkpoint(dir / "absent.json"), ValidationError);
}

TEST(Checkpoint, DuplicationCopiesTheTimeEmbedding) {
  num::Rng rng(3);
  const net::VelocityNet fm =
      net::VelocityNet::init(net::NetDims{2, 4, 8, 1}, net::TimeEmbedConfig{8, 1.0, 10.0}, net::NetMode::fm, rng);
  const net::Checkpoint ck = net::make_checkpoint(fm, {});
  const net::VelocityNet mf = net::duplicate_time_embedding(ck);
  EXPECT_EQ(mf.mode(), net::NetMode::mf);
  EXPECT_EQ(mf.params().at("interval_embed.weight"), fm.params().at("time_embed.weight"));
  EXPECT_EQ(mf.params().at("end_embed.bias"), fm.params().at("time_embed.bias"));
  EXPECT_THROW(net::duplicate_time_embedding(net::make_checkpoint(mf, {})), ValidationError);
}

TEST(ExperimentConfig, JsonRoundTripAndDigest) {
  harness::ExperimentConfig cfg;
  cfg.name = "round-trip";
  cfg.task.held_out = {"c1_0"};
  cfg.eval.steps = {1, 3};
  cfg.seed = 77;
  cfg.lr_decay = "cosine";
  const harness::ExperimentConfig back = harness::ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
  EXPECT_EQ(harness::config_digest(back), harness::config_digest(cfg));
  EXPECT_EQ(harness::config_digest(cfg).size(), 64u);

  harness::ExperimentConfig moved = cfg;
  moved.out_dir = "elsewhere";
  EXPECT_EQ(harness::config_digest(moved), harness::config_digest(cfg));
  harness::ExperimentConfig reseeded = cfg;
  reseeded.seed = 78;
  EXPECT_NE(harness::config_digest(reseeded), harness::config_digest(cfg));
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(harness::ExperimentConfig::from_json(Json{{"nmae", "typo"}}), ValidationError);
  EXPECT_THROW(harness::ExperimentConfig::from_json(Json{{"net", {{"width", 3}}}}), ValidationError);
  EXPECT_THROW(harness::ExperimentConfig::from_json(Json{{"batch_size", "big"}}), ValidationError);
  EXPECT_THROW(harness::ExperimentConfig::from_json(Json{{"task", {{"held_out", {"c9_9"}}}}}), ValidationError);
  EXPECT_THROW(harness::ExperimentConfig::from_json(Json{{"velocity_source", "oracle"}}), ValidationError);
  EXPECT_THROW(harness::ExperimentConfig::from_json(Json{{"adam", {{"decay", "step"}}}}), ValidationError);
  EXPECT_NO_THROW(harness::ExperimentConfig::from_json(Json::object()));
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(harness::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(harness::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(SampleSet, JsonlRoundTrip) {
  harness::SampleSet set;
  set.kind = "samples";
  set.config_digest = "d1";
  set.config = Json{{"name", "x"}};
  set.steps = 2;
  sample::SampleRun run;
  run.samples = num::Tensor::matrix({{0.1, 0.2}, {1.0 / 3.0, -4.0}});
  run.intermediates = {num::Tensor::matrix({{1, 1}, {2, 2}}), num::Tensor::matrix({{0.5, 0.5}, {1, 1}}), run.samples};
  set.append("c0_1", run);
  set.append("c1_0", num::Tensor::matrix({{7, 8}}));
  const std::string text = harness::sample_set_to_jsonl(set);
  const harness::SampleSet back = harness::parse_sample_set(text);
  EXPECT_EQ(back.kind, "samples");
  EXPECT_EQ(back.steps, std::optional<std::size_t>(2));
  EXPECT_EQ(back.data_dim, 2u);
  ASSERT_EQ(back.records.size(), 3u);
  EXPECT_EQ(back.records[1].x, (std::vector<double>{1.0 / 3.0, -4.0}));
  EXPECT_EQ(back.records[1].path.size(), 3u);
  EXPECT_EQ(harness::sample_set_to_jsonl(back), text);

  const auto groups = harness::group_by_condition(back);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].condition_id, "c0_1");
  EXPECT_EQ(groups[0].samples.rows(), 2u);

  EXPECT_THROW(harness::parse_sample_set(""), ValidationError);
  EXPECT_THROW(harness::parse_sample_set("{\"format\": \"other\"}\n"), ValidationError);
}

TEST(MetricsCsv, RoundTripWithMissingCells) {
  std::vector<harness::MetricsRow> rows(2);
  rows[0].step = 500;
  rows[0].loss = 0.125;
  rows[0].fidelity = {{1, 0.5}, {2, 0.75}};
  rows[0].energy_distance = 0.01;
  rows[1].step = 1000;
  rows[1].loss = 1.0 / 3.0;
  rows[1].fidelity = {{1, 0.875}, {2, 0.9}};
  rows[1].curvature = 0.02;
  std::string digest;
  const std::string csv = harness::metrics_to_csv(rows, {1, 2}, "feed");
  EXPECT_EQ(csv.rfind("# config_digest=feed\n", 0), 0u);
  EXPECT_EQ(harness::parse_metrics_csv(csv, &digest), rows);
  EXPECT_EQ(digest, "feed");

  rows[1].step = 500;
  EXPECT_THROW(harness::metrics_to_csv(rows, {1, 2}, "feed"), ValidationError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(harness::format_double(0.1), "0.1");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(harness::format_double(x)), x);
}

}  // namespace
}  // namespace mflab
