#include "mflab/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mflab/enc/analysis.hpp"
#include "mflab/errors.hpp"
#include "mflab/flow/affine_flow_map.hpp"
#include "mflab/harness/streams.hpp"

namespace mflab::harness {

namespace {

constexpr double kFdStep = 1e-5;

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

void say(const RecipeOptions& opts, const std::string& msg) {
  if (opts.log) opts.log(msg);
}

// Random mf network with every parameter perturbed, so that no layer is zero.
net::VelocityNet random_net(const net::NetDims& dims, const net::TimeEmbedConfig& tcfg, num::Rng& rng) {
  net::VelocityNet net = net::VelocityNet::init(dims, tcfg, net::NetMode::mf, rng);
  for (auto& [name, p] : net.params())
    for (double& v : p.data()) v += 0.3 * rng.normal();
  return net;
}

Tensor uniform_column(num::Rng& rng, std::size_t n, double lo, double hi) {
  Tensor t({n, 1});
  for (std::size_t i = 0; i < n; ++i) t[i] = lo + (hi - lo) * rng.uniform();
  return t;
}

double squared_error_sum(const Tensor& u, const Tensor& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - c[i]) * (u[i] - c[i]);
  return s;
}

struct AutodiffStats {
  double grad_max_rel = 0.0;
  double jvp_max_rel = 0.0;
  std::size_t grad_entries = 0;
  std::size_t jvp_entries = 0;
};

AutodiffStats autodiff_oracle(std::size_t nets, std::uint64_t seed) {
  AutodiffStats stats;
  const net::NetDims dims{2, 3, 8, 2};
  const net::TimeEmbedConfig tcfg{4, 1.0, 10.0};
  const std::size_t batch = 3;
  for (std::size_t k = 0; k < nets; ++k) {
    num::Rng rng = num::Rng(seed).split(k);
    net::VelocityNet net = random_net(dims, tcfg, rng);
    const Tensor z = rng.normal_tensor({batch, dims.data_dim});
    const Tensor psi = rng.normal_tensor({batch, dims.cond_dim});
    const Tensor t = uniform_column(rng, batch, 0.3, 0.9);
    Tensor r({batch, 1});
    for (std::size_t i = 0; i < batch; ++i) r[i] = (t[i] - 0.1) * rng.uniform();
    const Tensor target = rng.normal_tensor({batch, dims.data_dim});

    num::Tape tape;
    const num::Var u = net.u_tape(tape, tape.constant(z), tape.constant(t), tape.constant(r), tape.constant(psi));
    const num::Gradients grads = tape.backward(num::sum_sq(num::sub(u, tape.constant(target))));

    for (auto& [name, p] : net.params()) {
      const Tensor& g = grads.at(name);
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + kFdStep;
        const double up = squared_error_sum(net.forward_u(z, t, r, psi), target);
        p[i] = saved - kFdStep;
        const double down = squared_error_sum(net.forward_u(z, t, r, psi), target);
        p[i] = saved;
        const double fd = (up - down) / (2.0 * kFdStep);
        stats.grad_max_rel = std::max(stats.grad_max_rel, rel_err(g[i], fd, 1e-3));
        ++stats.grad_entries;
      }
    }

    const Tensor v = rng.normal_tensor({batch, dims.data_dim});
    const Tensor dudt = flow::total_derivative(net, z, t, r, psi, v);
    Tensor zp = z, zm = z, tp = t, tm = t;
    for (std::size_t i = 0; i < z.size(); ++i) {
      zp[i] += kFdStep * v[i];
      zm[i] -= kFdStep * v[i];
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      tp[i] += kFdStep;
      tm[i] -= kFdStep;
    }
    const Tensor up = net.forward_u(zp, tp, r, psi);
    const Tensor down = net.forward_u(zm, tm, r, psi);
    for (std::size_t i = 0; i < dudt.size(); ++i) {
      const double fd = (up[i] - down[i]) / (2.0 * kFdStep);
      stats.jvp_max_rel = std::max(stats.jvp_max_rel, rel_err(dudt[i], fd, 1e-3));
      ++stats.jvp_entries;
    }
  }
  return stats;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// 7x7 grid (2-D) spanning +-3 marginal std around the marginal mean at t.
Tensor probe_grid(const flow::GaussianTask& task, double t) {
  if (task.dim() != 2) throw ValidationError("probe grids are defined for 2-D tasks");
  const double s = task.marginal_std(t);
  const auto offsets = linspace(-3.0 * s, 3.0 * s, 7);
  Tensor z({offsets.size() * offsets.size(), 2});
  std::size_t k = 0;
  for (double a : offsets)
    for (double b : offsets) {
      z.at(k, 0) = (1.0 - t) * task.mean[0] + a;
      z.at(k, 1) = (1.0 - t) * task.mean[1] + b;
      ++k;
    }
  return z;
}

double mean_sq_rows(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.rows());
}

ExperimentConfig with_overrides(ExperimentConfig cfg, const RecipeOptions& opts, const std::string& sub) {
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.out_dir = (opts.out_dir / sub).string();
  return cfg;
}

// Trains fm, then mf from the fm checkpoint.
std::pair<TrainOutcome, TrainOutcome> pretrain_and_finetune(const ExperimentConfig& cfg, const RecipeOptions& opts) {
  TrainOptions fm_opts;
  fm_opts.mode = net::NetMode::fm;
  fm_opts.log = opts.log;
  TrainOutcome fm = train(cfg, fm_opts);
  TrainOptions mf_opts;
  mf_opts.mode = net::NetMode::mf;
  mf_opts.init_from = fm.latest_checkpoint;
  mf_opts.log = opts.log;
  TrainOutcome mf = train(cfg, mf_opts);
  return {std::move(fm), std::move(mf)};
}

struct SampleScore {
  double fidelity = 0.0;
  double energy_distance = 0.0;
  std::optional<double> curvature;
};

SampleScore score_runs(const TaskData& data, const std::vector<std::pair<std::string, sample::SampleRun>>& runs,
                       std::uint64_t seed, std::size_t n) {
  SampleScore s;
  std::vector<sample::ConditionSamples> cs;
  double ed = 0.0, curv = 0.0;
  for (std::size_t c = 0; c < runs.size(); ++c) {
    sample::ConditionSamples one;
    one.condition_id = runs[c].first;
    one.samples = runs[c].second.samples;
    cs.push_back(std::move(one));
    num::Rng ref = stream_rng(seed, Stream::eval_reference).split(c);
    ed += sample::energy_distance(runs[c].second.samples, data.sample(c, n, ref));
    if (runs[c].second.intermediates.size() >= 3) curv += sample::trajectory_curvature(runs[c].second).mean;
  }
  s.fidelity = sample::condition_fidelity(cs, data.layout()).overall;
  s.energy_distance = ed / static_cast<double>(runs.size());
  if (!runs.empty() && runs.front().second.intermediates.size() >= 3) s.curvature = curv / static_cast<double>(runs.size());
  return s;
}

Json score_json(const SampleScore& s) {
  Json j{{"fidelity", s.fidelity}, {"energy_distance", s.energy_distance}};
  if (s.curvature) j["curvature"] = *s.curvature;
  return j;
}

bool files_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::vector<std::filesystem::path> fa, fb;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(std::filesystem::relative(e.path(), a));
  for (const auto& e : std::filesystem::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(std::filesystem::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb || fa.empty()) return false;
  for (const auto& rel : fa)
    if (read_text_file(a / rel) != read_text_file(b / rel)) return false;
  return true;
}

}  // namespace

Check make_check(std::string name, double value, std::string relation, double threshold, std::string detail) {
  bool ok = false;
  if (relation == "<") ok = value < threshold;
  else if (relation == "<=") ok = value <= threshold;
  else if (relation == ">") ok = value > threshold;
  else if (relation == ">=") ok = value >= threshold;
  else throw ValidationError("unknown check relation '" + relation + "'");
  return Check{std::move(name), value, std::move(relation), threshold, ok, std::move(detail)};
}

bool RecipeResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<Check> RecipeResult::checks_with_prefix(const std::string& prefix) const {
  std::vector<Check> out;
  for (const auto& c : checks)
    if (c.name.rfind(prefix, 0) == 0) out.push_back(c);
  return out;
}

std::string format_table(const RecipeResult& result) {
  std::size_t width = 5;
  for (const auto& c : result.checks) width = std::max(width, c.name.size());
  std::ostringstream os;
  os << result.recipe << "\n";
  char buf[256];
  for (const auto& c : result.checks) {
    std::snprintf(buf, sizeof buf, "  %-*s  %12.6g %-2s %-10.6g  %s", static_cast<int>(width), c.name.c_str(), c.value,
                  c.relation.c_str(), c.threshold, c.passed ? "PASS" : "FAIL");
    os << buf;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << "\n";
  }
  os << (result.passed() ? "all checks passed" : "some checks failed") << "\n";
  return os.str();
}

ExperimentConfig gaussian_oracle_config() {
  ExperimentConfig cfg;
  cfg.name = "gaussian-oracle";
  cfg.task.kind = TaskKind::gaussian;
  cfg.task.gaussian = flow::GaussianTask{{1.0, -0.5}, 0.5};
  // The probe grid weights every t equally, so time is drawn uniformly too.
  cfg.schedule.family = flow::TimeFamily::uniform;
  cfg.batch_size = 512;
  cfg.adam.lr = 2e-3;
  cfg.lr_decay = "cosine";
  cfg.fm_steps = 10000;
  cfg.mf_steps = 10000;
  cfg.eval.every = 1000;
  cfg.eval.samples_per_condition = 1000;
  cfg.seed = 20240601;
  return cfg;
}

ExperimentConfig fig5_desk_config() {
  ExperimentConfig cfg;
  cfg.name = "fig5-desk";
  cfg.fm_steps = 3000;
  cfg.mf_steps = 8000;
  cfg.eval.every = 1000;
  cfg.eval.samples_per_condition = 1000;
  cfg.seed = 20240602;
  return cfg;
}

ExperimentConfig representation_config(enc::EmbedMode mode) {
  ExperimentConfig cfg;
  cfg.name = "representation-thesis";
  cfg.task.mixture.values_per_attribute = 3;
  cfg.embedding.synthetic.values_per_attribute = 3;
  cfg.embedding.synthetic.mode = mode;
  cfg.task.held_out = {"c0_2", "c1_1", "c2_0"};
  cfg.fm_steps = 3000;
  cfg.mf_steps = 4000;
  cfg.eval.every = 1000;
  cfg.eval.samples_per_condition = 500;
  cfg.seed = 20240603;
  return cfg;
}

double gaussian_velocity_rmse(const net::VelocityNet& net, const flow::GaussianTask& task, const Tensor& psi,
                              const std::vector<double>& times) {
  double acc = 0.0;
  for (double t : times) {
    const Tensor z = probe_grid(task, t);
    acc += mean_sq_rows(net.forward_v(z, t, psi), flow::analytic_marginal_velocity(task, z, t));
  }
  return std::sqrt(acc / static_cast<double>(times.size()));
}

double gaussian_average_velocity_rmse(const net::VelocityNet& net, const flow::GaussianTask& task, const Tensor& psi,
                                      const std::vector<double>& gaps) {
  double acc = 0.0;
  std::size_t count = 0;
  for (double gap : gaps) {
    for (double t = 1.0; t - gap >= -1e-12; t -= 0.25) {
      const double r = std::max(0.0, t - gap);
      const Tensor z = probe_grid(task, t);
      acc += mean_sq_rows(net.forward_u(z, t, r, psi), flow::analytic_average_velocity(task, z, t, r));
      ++count;
    }
  }
  return std::sqrt(acc / static_cast<double>(count));
}

RecipeResult oracle_suite(const RecipeOptions& opts) {
  RecipeResult res;
  res.recipe = "oracle-suite";
  const std::uint64_t seed = opts.seed.value_or(7);

  say(opts, "autodiff oracle over 100 random networks");
  const AutodiffStats ad = autodiff_oracle(100, seed);
  res.checks.push_back(make_check("autodiff.grad_max_rel_err", ad.grad_max_rel, "<", 1e-6,
                                  std::to_string(ad.grad_entries) + " parameter entries"));
  res.checks.push_back(make_check("autodiff.jvp_max_rel_err", ad.jvp_max_rel, "<", 1e-4,
                                  std::to_string(ad.jvp_entries) + " tangent entries"));

  {
    num::Rng rng = num::Rng(seed).split(1000);
    const net::VelocityNet net = random_net(net::NetDims{2, 8, 32, 2}, net::TimeEmbedConfig{}, rng);
    const std::size_t n = 1000;
    const Tensor z = rng.normal_tensor({n, 2}), v = rng.normal_tensor({n, 2}), psi = rng.normal_tensor({n, 8});
    const Tensor t = uniform_column(rng, n, 0.0, 1.0);
    const Tensor target = flow::meanflow_target(net, z, t, t, psi, v);
    res.checks.push_back(make_check("boundary.max_abs_diff", num::max_abs_diff(target, v), "<=", 1e-12,
                                    "u_tgt vs v at r = t, 1000 inputs"));
  }

  {
    num::Rng rng = num::Rng(seed).split(1001);
    const flow::AffineFlowMap map(rng.normal_tensor({2, 2}), rng.normal_tensor({1, 2}), rng.normal_tensor({1, 2}));
    const std::size_t n = 200;
    const Tensor z = rng.normal_tensor({n, 2}), v = rng.normal_tensor({n, 2}), psi({n, 1});
    const Tensor t = uniform_column(rng, n, 0.0, 1.0);
    Tensor r({n, 1});
    for (std::size_t i = 0; i < n; ++i) r[i] = t[i] * rng.uniform();
    const Tensor target = flow::meanflow_target(map, z, t, r, psi, v);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        const double av = map.a().at(j, 0) * v.at(i, 0) + map.a().at(j, 1) * v.at(i, 1);
        const double expect = v.at(i, j) + (r[i] - t[i]) * (map.b()[j] + av);
        worst = std::max(worst, std::abs(target.at(i, j) - expect));
      }
    res.checks.push_back(make_check("linear_standin.max_abs_diff", worst, "<=", 1e-10, "v + (r-t)(b + A v)"));
  }

  {
    const flow::GaussianTask task{{1.0, -0.5}, 0.5};
    double worst = 0.0;
    for (double t : {1.0, 0.8, 0.5}) {
      const Tensor z = probe_grid(task, t);
      for (double r : {0.0, 0.25, 0.45}) {
        const Tensor exact = flow::gaussian_ode_flow(task, z, t, r);
        const Tensor avg = flow::analytic_average_velocity(task, z, t, r);
        for (std::size_t i = 0; i < z.size(); ++i) worst = std::max(worst, std::abs(z[i] + (r - t) * avg[i] - exact[i]));
      }
    }
    res.checks.push_back(make_check("gaussian_flow.rk4_vs_closed_form", worst, "<", 1e-8));
  }

  {
    num::Rng rng = num::Rng(seed).split(1002);
    flow::ScheduleConfig sc;
    sc.family = flow::TimeFamily::uniform;
    sc.neq_ratio_start = sc.neq_ratio_end = 1.0;
    const std::size_t n = 100000;
    std::size_t upper = 0;
    for (std::size_t i = 0; i < n; ++i) upper += flow::sample_timepair(rng, 0.5, sc).t >= 0.5;
    const double p = static_cast<double>(upper) / static_cast<double>(n);
    res.checks.push_back(make_check("schedule.p_t_ge_half_deviation", std::abs(p - 0.75), "<=", 0.02,
                                    "P(t >= 0.5) = " + format_double(p)));
    sc.neq_ratio_start = sc.neq_ratio_end = 0.0;
    std::size_t equal = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto tp = flow::sample_timepair(rng, 0.5, sc);
      equal += tp.t == tp.r;
    }
    res.checks.push_back(make_check("schedule.equal_fraction_at_neq0", static_cast<double>(equal) / n, ">=", 1.0));
  }

  {
    num::Rng rng = num::Rng(seed).split(1003);
    const net::VelocityNet net = random_net(net::NetDims{2, 8, 16, 2}, net::TimeEmbedConfig{}, rng);
    net::TrainingMetadata meta;
    meta.step = 42;
    meta.seed = seed;
    meta.config_digest = "roundtrip";
    num::AdamState adam;
    adam.m = adam.v = net.params();
    adam.step = 3;
    const net::Checkpoint ck = net::make_checkpoint(net, meta, adam);
    const auto path = opts.out_dir / "oracle-suite" / "roundtrip.json";
    std::filesystem::create_directories(path.parent_path());
    net::save_checkpoint(ck, path);
    const net::Checkpoint back = net::load_checkpoint(path);
    bool same = back.params == ck.params && back.optimizer && back.optimizer->m == adam.m &&
                back.optimizer->v == adam.v && back.optimizer->step == adam.step && back.meta.step == meta.step;
    same = same && net::checkpoint_to_json(back).dump() == net::checkpoint_to_json(ck).dump();
    res.checks.push_back(make_check("persistence.checkpoint_roundtrip_bitwise", same ? 1.0 : 0.0, ">=", 1.0));
  }

  {
    say(opts, "determinism: two identical short training runs");
    ExperimentConfig cfg;
    cfg.name = "determinism";
    cfg.task.kind = TaskKind::gaussian;
    cfg.hidden_dim = 16;
    cfg.depth = 2;
    cfg.batch_size = 32;
    cfg.fm_steps = 30;
    cfg.mf_steps = 20;
    cfg.checkpoint_every = 10;
    cfg.eval.every = 10;
    cfg.eval.samples_per_condition = 64;
    cfg.seed = seed;
    const auto root = opts.out_dir / "oracle-suite" / "determinism";
    std::filesystem::remove_all(root);
    for (const char* run : {"a", "b"}) {
      RecipeOptions sub;
      sub.out_dir = root;
      pretrain_and_finetune(with_overrides(cfg, sub, run), sub);
    }
    const bool same = files_identical(root / "a", root / "b");
    res.checks.push_back(make_check("determinism.repeat_run_identical", same ? 1.0 : 0.0, ">=", 1.0,
                                    "every file under two run directories"));
  }
  return res;
}

RecipeResult gaussian_oracle(const RecipeOptions& opts) {
  RecipeResult res;
  res.recipe = "gaussian-oracle";
  const ExperimentConfig cfg = with_overrides(gaussian_oracle_config(), opts, "gaussian-oracle");
  auto [fm, mf] = pretrain_and_finetune(cfg, opts);
  const TaskData data(cfg);
  const Tensor& psi = data.conditions().front().psi;
  const auto times = linspace(0.0, 1.0, 11);
  const double fm_rmse = gaussian_velocity_rmse(fm.net, cfg.task.gaussian, psi, times);
  const double mf_rmse = gaussian_average_velocity_rmse(mf.net, cfg.task.gaussian, psi, {0.25, 0.5, 1.0});
  res.checks.push_back(make_check("gaussian.fm_velocity_rmse", fm_rmse, "<", 0.1,
                                  std::to_string(cfg.fm_steps) + " fm steps"));
  res.checks.push_back(make_check("gaussian.mf_average_velocity_rmse", mf_rmse, "<", 0.15,
                                  std::to_string(cfg.mf_steps) + " mf steps"));
  res.summary = Json{{"config_digest", config_digest(cfg)},
                     {"fm_steps", cfg.fm_steps},
                     {"mf_steps", cfg.mf_steps},
                     {"fm_velocity_rmse", fm_rmse},
                     {"mf_average_velocity_rmse", mf_rmse}};
  return res;
}

RecipeResult fig5_desk(const RecipeOptions& opts) {
  RecipeResult res;
  res.recipe = "fig5-desk";
  const ExperimentConfig cfg = with_overrides(fig5_desk_config(), opts, "fig5-desk");
  auto [fm, mf] = pretrain_and_finetune(cfg, opts);
  const TaskData data(cfg);
  const std::size_t n = 5000;
  say(opts, "final evaluation at N = 5000 per condition");
  std::map<std::size_t, SampleScore> mf_scores;
  for (std::size_t steps : {1, 2, 4}) mf_scores[steps] = score_runs(data, sample_conditions(mf.net, data, steps, n, cfg.seed, false), cfg.seed, n);
  const SampleScore fm1 = score_runs(data, sample_conditions(fm.net, data, 1, n, cfg.seed, false), cfg.seed, n);
  const SampleScore fm50 = score_runs(data, sample_conditions(fm.net, data, 50, n, cfg.seed, false), cfg.seed, n);

  const auto& m1 = mf_scores[1];
  res.checks.push_back(make_check("one_step.mf_energy_distance", m1.energy_distance, "<", 0.05));
  res.checks.push_back(make_check("one_step.mf_fidelity", m1.fidelity, ">", 0.9));
  res.checks.push_back(make_check("one_step.fm_energy_distance_minus_mf", fm1.energy_distance - m1.energy_distance,
                                  ">", 0.0, "fm 1-step " + format_double(fm1.energy_distance)));
  res.checks.push_back(make_check("one_step.mf_fidelity_minus_fm", m1.fidelity - fm1.fidelity, ">", 0.0,
                                  "fm 1-step " + format_double(fm1.fidelity)));
  const double f1 = m1.fidelity, f2 = mf_scores[2].fidelity, f4 = mf_scores[4].fidelity;
  res.checks.push_back(make_check("step_scaling.f1_minus_f2", f1 - f2, "<=", 0.02));
  res.checks.push_back(make_check("step_scaling.f2_minus_f4", f2 - f4, "<=", 0.02));
  res.checks.push_back(make_check("step_scaling.abs_f4_minus_fm50", std::abs(f4 - fm50.fidelity), "<=", 0.05,
                                  "fm 50-step " + format_double(fm50.fidelity)));

  Json table = Json::object();
  for (const auto& [steps, s] : mf_scores) table["mf_" + std::to_string(steps)] = score_json(s);
  table["fm_1"] = score_json(fm1);
  table["fm_50"] = score_json(fm50);
  res.summary = Json{{"config_digest", config_digest(cfg)},
                     {"samples_per_condition", n},
                     {"table", table},
                     {"monotone", f1 <= f2 && f2 <= f4}};
  return res;
}

RecipeResult representation_thesis(const RecipeOptions& opts) {
  RecipeResult res;
  res.recipe = "representation-thesis";
  std::map<std::string, SampleScore> one_step, fm_paths;
  Json summary = Json::object();
  for (auto mode : {enc::EmbedMode::disentangled, enc::EmbedMode::entangled}) {
    const std::string name(enc::to_string(mode));
    const ExperimentConfig cfg = with_overrides(representation_config(mode), opts, "representation-thesis/" + name);
    auto [fm, mf] = pretrain_and_finetune(cfg, opts);
    const TaskData data(cfg);
    const std::size_t n = 2000;
    one_step[name] = score_runs(data, sample_conditions(mf.net, data, 1, n, cfg.seed, false), cfg.seed, n);
    fm_paths[name] = score_runs(data, sample_conditions(fm.net, data, 50, n, cfg.seed, true), cfg.seed, n);
    summary[name] = Json{{"config_digest", config_digest(cfg)},
                         {"mf_1", score_json(one_step[name])},
                         {"fm_50", score_json(fm_paths[name])}};
  }
  const double gap = one_step["disentangled"].fidelity - one_step["entangled"].fidelity;
  res.checks.push_back(make_check("representation.fidelity_gap", gap, ">=", 0.1,
                                  "1-step mf, all 9 conditions incl. 3 held out"));
  const double dc = fm_paths["disentangled"].curvature.value_or(0.0);
  const double ec = fm_paths["entangled"].curvature.value_or(0.0);
  res.checks.push_back(make_check("representation.curvature_entangled_minus_disentangled", ec - dc, ">", 0.0,
                                  "fm 50-step curvature " + format_double(dc) + " vs " + format_double(ec)));
  res.summary = summary;
  return res;
}

RecipeResult discriminability_ablation(const RecipeOptions& opts) {
  RecipeResult res;
  res.recipe = "discriminability-ablation";
  const std::uint64_t seed = opts.seed.value_or(11);
  Json rows = Json::array();
  std::map<std::string, double> disc;
  for (auto mode : {enc::EmbedMode::disentangled, enc::EmbedMode::entangled}) {
    for (double sep : {4.0, 2.0, 1.0, 0.5}) {
      enc::SyntheticEmbedSpec spec;
      spec.values_per_attribute = 3;
      spec.separation = sep;
      spec.mode = mode;
      const auto table = enc::gen_synthetic_embeddings(spec, stream_seed(seed, Stream::embeddings));
      const enc::Corpus corpus = enc::synthetic_corpus(table, enc::SyntheticCorpusSpec{}, stream_seed(seed, Stream::corpus));
      const auto queries = enc::select_queries(corpus, 32, seed);
      const double d = enc::discriminability_score(corpus, queries, 5).score;
      const double g = enc::disentanglement_score(corpus, 0.5, seed).score;
      const std::string key = std::string(enc::to_string(mode)) + "@" + format_double(sep);
      disc[key] = d;
      rows.push_back(Json{{"mode", enc::to_string(mode)}, {"separation", sep}, {"discriminability", d},
                          {"disentanglement", g}});
    }
  }
  res.checks.push_back(make_check("ablation.discriminability_sep4_minus_sep05",
                                  disc["disentangled@4"] - disc["disentangled@0.5"], ">", 0.0));
  res.summary = Json{{"rows", rows}, {"k", 5}, {"rho", 0.5}, {"query_count", 32}};
  return res;
}

std::vector<std::string> recipe_names() {
  return {"discriminability-ablation", "fig5-desk", "gaussian-oracle", "oracle-suite", "representation-thesis"};
}

RecipeResult run_recipe(const std::string& name, const RecipeOptions& opts) {
  RecipeResult res;
  if (name == "oracle-suite") res = oracle_suite(opts);
  else if (name == "gaussian-oracle") res = gaussian_oracle(opts);
  else if (name == "fig5-desk") res = fig5_desk(opts);
  else if (name == "representation-thesis") res = representation_thesis(opts);
  else if (name == "discriminability-ablation") res = discriminability_ablation(opts);
  else {
    std::string list;
    for (const auto& n : recipe_names()) list += (list.empty() ? "" : ", ") + n;
    throw ValidationError("unknown recipe '" + name + "'; available recipes: " + list);
  }
  Json checks = Json::array();
  for (const auto& c : res.checks)
    checks.push_back(Json{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold},
                          {"passed", c.passed}, {"detail", c.detail}});
  const Json out{{"recipe", res.recipe}, {"passed", res.passed()}, {"checks", checks}, {"summary", res.summary}};
  write_json_file(opts.out_dir / name / "summary.json", out);
  return res;
}

}  // namespace mflab::harness
