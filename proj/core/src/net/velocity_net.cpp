#include "mflab/net/velocity_net.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mflab::net {

void TimeEmbedConfig::validate() const {
  if (feature_dim == 0 || feature_dim % 2 != 0)
    throw ValidationError("time embedding feature_dim must be a positive even number");
  if (!(min_freq > 0.0) || !(max_freq > min_freq))
    throw ValidationError("time embedding requires 0 < min_freq < max_freq");
}

std::vector<double> TimeEmbedConfig::frequencies() const {
  validate();
  const std::size_t half = feature_dim / 2;
  std::vector<double> f(half);
  if (half == 1) {
    f[0] = min_freq;
    return f;
  }
  const double ratio = max_freq / min_freq;
  for (std::size_t i = 0; i < half; ++i)
    f[i] = min_freq * std::pow(ratio, static_cast<double>(i) / static_cast<double>(half - 1));
  return f;
}

void NetDims::validate() const {
  if (data_dim == 0 || cond_dim == 0 || hidden_dim == 0)
    throw ValidationError("network dims must be positive");
  if (depth == 0) throw ValidationError("network depth must be at least 1");
}

std::string_view to_string(NetMode mode) { return mode == NetMode::fm ? "fm" : "mf"; }

NetMode parse_mode(std::string_view text) {
  if (text == "fm") return NetMode::fm;
  if (text == "mf") return NetMode::mf;
  throw ValidationError("unknown network mode '" + std::string(text) + "' (expected fm or mf)");
}

std::vector<std::pair<std::string, num::Shape>> parameter_layout(const NetDims& dims, const TimeEmbedConfig& time_cfg,
                                                                 NetMode mode) {
  std::vector<std::pair<std::string, num::Shape>> layout;
  auto affine = [&](const std::string& prefix, std::size_t in, std::size_t out) {
    layout.emplace_back(prefix + ".bias", num::Shape{1, out});
    layout.emplace_back(prefix + ".weight", num::Shape{in, out});
  };
  const std::size_t f = time_cfg.feature_dim, h = dims.hidden_dim;
  if (mode == NetMode::fm) {
    affine("time_embed", f, h);
  } else {
    affine("end_embed", f, h);
    affine("interval_embed", f, h);
  }
  std::size_t in = dims.data_dim + h + dims.cond_dim;
  for (std::size_t i = 0; i < dims.depth; ++i) {
    affine("trunk." + std::to_string(i), in, h);
    in = h;
  }
  affine("trunk." + std::to_string(dims.depth), in, dims.data_dim);
  std::sort(layout.begin(), layout.end());
  return layout;
}

VelocityNet::VelocityNet(NetDims dims, TimeEmbedConfig time_cfg, NetMode mode, num::ParamSet params)
    : dims_(dims), time_cfg_(time_cfg), mode_(mode), params_(std::move(params)) {
  dims_.validate();
  freqs_ = time_cfg_.frequencies();
  const auto layout = parameter_layout(dims_, time_cfg_, mode_);
  if (layout.size() != params_.size()) {
    throw ValidationError("parameter set has " + std::to_string(params_.size()) + " tensors, expected " +
                          std::to_string(layout.size()) + " for a " + std::string(to_string(mode_)) + " net");
  }
  for (const auto& [name, shape] : layout) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ValidationError("missing parameter '" + name + "'");
    if (it->second.shape() != shape) {
      throw ShapeError("parameter '" + name + "' has shape " + num::shape_str(it->second.shape()) + ", expected " +
                       num::shape_str(shape));
    }
  }
  for (std::size_t i = 0; i <= dims_.depth; ++i) trunk_names_.push_back("trunk." + std::to_string(i));
}

VelocityNet VelocityNet::init(const NetDims& dims, const TimeEmbedConfig& time_cfg, NetMode mode, num::Rng& rng) {
  dims.validate();
  time_cfg.validate();
  const std::string output = "trunk." + std::to_string(dims.depth);
  num::ParamSet params;
  for (const auto& [name, shape] : parameter_layout(dims, time_cfg, mode)) {
    Tensor p(shape);
    const bool is_weight = name.ends_with(".weight");
    if (is_weight && !name.starts_with(output + ".")) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(shape[0]));
      for (double& v : p.data()) v = (2.0 * rng.uniform() - 1.0) * bound;
    }
    params.emplace(name, std::move(p));
  }
  return VelocityNet(dims, time_cfg, mode, std::move(params));
}

Tensor VelocityNet::check_inputs(const Tensor& z, const Tensor& t, const Tensor& r, const Tensor& psi) const {
  if (z.rank() != 2 || z.cols() != dims_.data_dim) {
    throw ShapeError("forward_u: z has shape " + num::shape_str(z.shape()) + ", expected (B, " +
                     std::to_string(dims_.data_dim) + ")");
  }
  const std::size_t batch = z.rows();
  for (const Tensor* col : {&t, &r}) {
    if (col->rank() != 2 || col->rows() != batch || col->cols() != 1) {
      throw ShapeError("forward_u: time column has shape " + num::shape_str(col->shape()) + ", expected (" +
                       std::to_string(batch) + ", 1)");
    }
  }
  if (psi.cols() != dims_.cond_dim || (psi.rows() != batch && psi.rows() != 1)) {
    throw ShapeError("forward_u: psi has shape " + num::shape_str(psi.shape()) + ", expected (" +
                     std::to_string(batch) + ", " + std::to_string(dims_.cond_dim) + ")");
  }
  for (std::size_t i = 0; i < batch; ++i) {
    if (t[i] < r[i]) {
      std::ostringstream os;
      os << "time convention violated: t=" << t[i] << " < r=" << r[i] << " at row " << i << " (need t >= r)";
      throw ValidationError(os.str());
    }
    if (mode_ == NetMode::fm && t[i] != r[i])
      throw ValidationError("fm-mode net has no interval embedding; it can only be evaluated at r = t");
  }
  if (psi.rows() == batch) return psi;
  return num::repeat_row(psi.reshaped({1, dims_.cond_dim}), batch);
}

Tensor VelocityNet::forward_u(const Tensor& z, const Tensor& t, const Tensor& r, const Tensor& psi) const {
  Tensor psi_b = check_inputs(z, t, r, psi);
  num::PlainContext ctx;
  return apply(ctx, z, t, r, psi_b);
}

Tensor VelocityNet::forward_u(const Tensor& z, double t, double r, const Tensor& psi) const {
  return forward_u(z, Tensor::full(z.rows(), 1, t), Tensor::full(z.rows(), 1, r), psi);
}

Tensor VelocityNet::forward_v(const Tensor& z, const Tensor& t, const Tensor& psi) const {
  return forward_u(z, t, t, psi);
}

Tensor VelocityNet::forward_v(const Tensor& z, double t, const Tensor& psi) const { return forward_u(z, t, t, psi); }

Tensor VelocityNet::phi_cond(double t, double r) const {
  if (!(t >= 0.0 && t <= 1.0 && r >= 0.0 && r <= 1.0))
    throw ValidationError("phi_cond: times must lie in [0, 1]");
  if (t < r) throw ValidationError("phi_cond: time convention violated, need t >= r");
  if (mode_ == NetMode::fm && t != r)
    throw ValidationError("phi_cond: fm-mode net has no interval embedding; need r = t");
  num::PlainContext ctx;
  return time_embedding(ctx, Tensor::full(1, 1, t), Tensor::full(1, 1, r));
}

num::DualTensor VelocityNet::u_dual(const num::DualTensor& z, const num::DualTensor& t, const num::DualTensor& r,
                                    const num::DualTensor& psi) const {
  check_inputs(z.value(), t.value(), r.value(), psi.value());
  if (psi.value().rows() != z.value().rows()) throw ShapeError("u_dual: psi must have one row per batch entry");
  num::DualContext ctx;
  return apply(ctx, z, t, r, psi);
}

num::Var VelocityNet::u_tape(num::Tape& tape, const num::Var& z, const num::Var& t, const num::Var& r,
                             const num::Var& psi) const {
  check_inputs(z.value(), t.value(), r.value(), psi.value());
  if (psi.value().rows() != z.value().rows()) throw ShapeError("u_tape: psi must have one row per batch entry");
  return apply(tape, z, t, r, psi);
}

}  // namespace mflab::net
