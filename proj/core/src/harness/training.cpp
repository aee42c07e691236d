#include "mflab/harness/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "mflab/errors.hpp"
#include "mflab/harness/streams.hpp"

namespace mflab::harness {

namespace {

std::string step_name(std::int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%08lld.json", static_cast<long long>(step));
  return buf;
}

bool grads_finite(const num::Gradients& g) {
  for (const auto& [name, t] : g)
    if (!t.all_finite()) return false;
  return true;
}

void say(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

}  // namespace

std::filesystem::path run_dir(const ExperimentConfig& cfg, net::NetMode mode) {
  return std::filesystem::path(cfg.out_dir) / std::string(net::to_string(mode));
}

std::vector<std::pair<std::string, sample::SampleRun>> sample_conditions(const net::VelocityNet& net,
                                                                          const TaskData& data, std::size_t steps,
                                                                          std::size_t n, std::uint64_t seed,
                                                                          bool record, std::optional<net::NetMode> as) {
  const net::NetMode mode = as.value_or(net.mode());
  std::vector<std::pair<std::string, sample::SampleRun>> out;
  for (std::size_t c = 0; c < data.conditions().size(); ++c) {
    const auto& cond = data.conditions()[c];
    num::Rng rng = stream_rng(seed, Stream::eval_noise).split(c);
    sample::SampleRun run = mode == net::NetMode::mf ? sample::meanflow_sample(net, cond.psi, steps, rng, n, record)
                                                     : sample::fm_euler_sample(net, cond.psi, steps, rng, n, record);
    out.emplace_back(cond.id, std::move(run));
  }
  return out;
}

MetricsRow evaluate(const net::VelocityNet& net, const TaskData& data, const EvalConfig& eval, std::uint64_t seed,
                    std::int64_t step) {
  MetricsRow row;
  row.step = step;
  const std::size_t n = eval.samples_per_condition;
  const std::size_t fewest = *std::min_element(eval.steps.begin(), eval.steps.end());
  const std::size_t most = *std::max_element(eval.steps.begin(), eval.steps.end());
  for (std::size_t steps : eval.steps) {
    const bool record = steps == most && steps >= 2;
    const auto runs = sample_conditions(net, data, steps, n, seed, record);
    if (data.is_mixture()) {
      std::vector<sample::ConditionSamples> cs;
      for (const auto& [id, run] : runs) {
        sample::ConditionSamples one;
        one.condition_id = id;
        one.samples = run.samples;
        cs.push_back(std::move(one));
      }
      row.fidelity[steps] = sample::condition_fidelity(cs, data.layout()).overall;
    }
    if (steps == fewest) {
      double ed = 0.0;
      for (std::size_t c = 0; c < runs.size(); ++c) {
        num::Rng ref_rng = stream_rng(seed, Stream::eval_reference).split(c);
        ed += sample::energy_distance(runs[c].second.samples, data.sample(c, n, ref_rng));
      }
      row.energy_distance = ed / static_cast<double>(runs.size());
    }
    if (record) {
      double curv = 0.0;
      for (const auto& [id, run] : runs) curv += sample::trajectory_curvature(run).mean;
      row.curvature = curv / static_cast<double>(runs.size());
    }
  }
  return row;
}

TrainOutcome train(const ExperimentConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  const TaskData data(cfg);
  const std::string digest = config_digest(cfg);
  const net::NetMode mode = opts.mode;
  const bool mf = mode == net::NetMode::mf;
  const std::int64_t total = opts.steps.value_or(mf ? cfg.mf_steps : cfg.fm_steps);
  if (total < 0) throw ValidationError("train: step count must be non-negative");
  const net::NetDims dims = data.net_dims(cfg);
  const auto dir = run_dir(cfg, mode);
  std::filesystem::create_directories(dir);

  std::optional<net::Checkpoint> init;
  if (opts.init_from) {
    init = net::load_checkpoint(*opts.init_from);
    if (init->mode != net::NetMode::fm)
      throw ValidationError("--init-from expects an fm checkpoint, got a " + std::string(net::to_string(init->mode)) +
                            " checkpoint: " + opts.init_from->string());
    if (init->dims != dims || init->time_cfg != cfg.time_embed)
      throw ValidationError("--init-from checkpoint dimensions do not match the config");
  }
  std::optional<net::VelocityNet> teacher;
  if (mf && cfg.velocity_source == "pretrained") {
    if (!init)
      throw ValidationError("mf training with velocity_source 'pretrained' needs --init-from an fm checkpoint "
                            "(use velocity_source 'conditional' to train from scratch)");
    teacher = net::net_from_checkpoint(*init);
  }
  const flow::VelocitySource source =
      teacher ? flow::VelocitySource::pretrained(*teacher) : flow::VelocitySource::conditional();

  std::optional<net::VelocityNet> net;
  num::AdamState adam;
  std::int64_t start = 0;
  double window_sum = 0.0;
  std::int64_t window_count = 0;
  std::vector<MetricsRow> metrics;

  if (opts.resume) {
    const auto latest = dir / "latest.json";
    if (!std::filesystem::exists(latest)) throw ValidationError("--resume: no checkpoint at " + latest.string());
    const net::Checkpoint ck = net::load_checkpoint(latest);
    if (ck.mode != mode) throw ValidationError("--resume: checkpoint mode does not match --mode");
    if (ck.meta.config_digest != digest)
      throw ValidationError("--resume: checkpoint was produced by a different config (digest " +
                            ck.meta.config_digest + ", expected " + digest + ")");
    net = net::net_from_checkpoint(ck);
    if (ck.optimizer) adam = *ck.optimizer;
    start = ck.meta.step;
    window_sum = ck.meta.run_state.value("loss_window_sum", 0.0);
    window_count = ck.meta.run_state.value("loss_window_count", std::int64_t{0});
    if (std::filesystem::exists(dir / "metrics.csv")) {
      for (auto& row : parse_metrics_csv(read_text_file(dir / "metrics.csv")))
        if (row.step <= start) metrics.push_back(std::move(row));
    }
    say(opts.log, "resuming " + std::string(net::to_string(mode)) + " run at step " + std::to_string(start));
  } else if (init) {
    net = mf ? net::duplicate_time_embedding(*init) : net::net_from_checkpoint(*init);
  } else {
    num::Rng rng = stream_rng(cfg.seed, mf ? Stream::mf_init : Stream::fm_init);
    net = net::VelocityNet::init(dims, cfg.time_embed, mode, rng);
  }
  if (start > total) throw ValidationError("--resume: checkpoint step is beyond the requested step count");

  auto checkpoint = [&](std::int64_t step) {
    net::TrainingMetadata meta;
    meta.step = step;
    meta.seed = cfg.seed;
    meta.config_digest = digest;
    meta.config = cfg.content_json();
    meta.run_state = Json{{"loss_window_sum", window_sum}, {"loss_window_count", window_count}};
    return net::make_checkpoint(*net, std::move(meta), adam);
  };

  const num::Rng train_base = stream_rng(cfg.seed, mf ? Stream::mf_train : Stream::fm_train);
  for (std::int64_t s = start; s < total; ++s) {
    const double progress = static_cast<double>(s) / static_cast<double>(total);
    num::Rng rng = train_base.split(static_cast<std::uint64_t>(s));
    const flow::TrainBatch batch = data.draw_batch(cfg.batch_size, rng, progress, cfg.schedule, mf);
    flow::LossResult res;
    try {
      if (mf) {
        res = flow::meanflow_loss_grad(*net, batch, source);
      } else {
        const Tensor z_t = flow::interpolate(batch.x, batch.eps, batch.t);
        res = flow::fm_loss_grad(*net, z_t, batch.t, batch.psi, flow::cond_velocity(batch.x, batch.eps));
      }
      if (!std::isfinite(res.loss) || !grads_finite(res.grads))
        throw NumericError("non-finite loss or gradient");
    } catch (const NumericError& e) {
      const auto path = dir / "last_good.json";
      net::save_checkpoint(checkpoint(s), path);
      throw NumericError("training diverged at step " + std::to_string(s + 1) + " (" + e.what() +
                         "); last good parameters saved to " + path.string());
    }
    num::AdamConfig step_cfg = cfg.adam;
    if (cfg.lr_decay == "cosine") step_cfg.lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    num::adam_step(net->params(), res.grads, adam, step_cfg);
    window_sum += res.loss;
    ++window_count;

    const std::int64_t step = s + 1;
    if (step % cfg.eval.every == 0 || step == total) {
      MetricsRow row = evaluate(*net, data, cfg.eval, cfg.seed, step);
      row.loss = window_sum / static_cast<double>(window_count);
      window_sum = 0.0;
      window_count = 0;
      metrics.push_back(row);
      write_text_file(dir / "metrics.csv", metrics_to_csv(metrics, cfg.eval.steps, digest));
      std::string msg = std::string(net::to_string(mode)) + " step " + std::to_string(step) +
                        " loss " + format_double(row.loss);
      for (const auto& [k, v] : row.fidelity) msg += " fid" + std::to_string(k) + " " + format_double(v);
      if (row.energy_distance) msg += " ed " + format_double(*row.energy_distance);
      say(opts.log, msg);
    }
    if (step % cfg.checkpoint_every == 0 || step == total) {
      const net::Checkpoint ck = checkpoint(step);
      net::save_checkpoint(ck, dir / step_name(step));
      net::save_checkpoint(ck, dir / "latest.json");
    }
  }
  if (start == total && !std::filesystem::exists(dir / "latest.json"))
    net::save_checkpoint(checkpoint(total), dir / "latest.json");
  if (metrics.empty() || start == total)
    write_text_file(dir / "metrics.csv", metrics_to_csv(metrics, cfg.eval.steps, digest));
  return TrainOutcome{std::move(*net), std::move(metrics), dir / "latest.json"};
}

}  // namespace mflab::harness
