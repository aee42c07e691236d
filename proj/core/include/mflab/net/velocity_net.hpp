#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mflab/num/dual.hpp"
#include "mflab/num/kernels.hpp"
#include "mflab/num/params.hpp"
#include "mflab/num/rng.hpp"
#include "mflab/num/tape.hpp"

namespace mflab::net {

using num::Tensor;

/// Sinusoidal featurization of a scalar time on a geometric frequency ladder.
struct TimeEmbedConfig {
  std::size_t feature_dim = 32;  // sin + cos features, must be even
  double min_freq = 1.0;
  double max_freq = 1000.0;

  void validate() const;
  std::vector<double> frequencies() const;
  friend bool operator==(const TimeEmbedConfig&, const TimeEmbedConfig&) = default;
};

struct NetDims {
  std::size_t data_dim = 2;
  std::size_t cond_dim = 8;
  std::size_t hidden_dim = 128;
  std::size_t depth = 3;  // hidden affine+SiLU layers before the output layer

  void validate() const;
  friend bool operator==(const NetDims&, const NetDims&) = default;
};

// fm: one time embedding, trained as v(z, t, psi).
// mf: duplicated interval/end embeddings, u(z, t, r, psi).
enum class NetMode { fm, mf };

std::string_view to_string(NetMode mode);
NetMode parse_mode(std::string_view text);

/// Conditional velocity / flow-map network
///   u(z, t, r, psi) = trunk(concat[z, phi_cond(t, r), psi])
///   phi_cond(t, r)  = phi_interval(t - r) + phi_end(t)
/// where each phi is one affine layer over sinusoidal time features. An fm-mode
/// net has only the single `time_embed` branch and is evaluated at r = t.
class VelocityNet {
 public:
  VelocityNet(NetDims dims, TimeEmbedConfig time_cfg, NetMode mode, num::ParamSet params);

  /// Fresh network: uniform(+-1/sqrt(fan_in)) weights, zero biases, and a
  /// zero output layer so the untrained field is identically zero.
  static VelocityNet init(const NetDims& dims, const TimeEmbedConfig& time_cfg, NetMode mode, num::Rng& rng);

  const NetDims& dims() const noexcept { return dims_; }
  const TimeEmbedConfig& time_config() const noexcept { return time_cfg_; }
  NetMode mode() const noexcept { return mode_; }
  const num::ParamSet& params() const noexcept { return params_; }
  num::ParamSet& params() noexcept { return params_; }
  std::size_t parameter_count() const { return num::parameter_count(params_); }

  /// The network body, generic over the evaluation context (plain tensors,
  /// dual tensors for JVP, or a reverse-mode tape). Inputs: z (B x data_dim),
  /// t and r (B x 1 columns), psi (B x cond_dim). No convention checks here.
  template <class Ctx>
  typename Ctx::value_type apply(Ctx& ctx, const typename Ctx::value_type& z, const typename Ctx::value_type& t,
                                 const typename Ctx::value_type& r, const typename Ctx::value_type& psi) const;

  template <class Ctx>
  typename Ctx::value_type time_embedding(Ctx& ctx, const typename Ctx::value_type& t,
                                          const typename Ctx::value_type& r) const;

  /// Average-velocity prediction. t and r are per-row columns (B x 1); psi may
  /// have B rows or a single row that is shared by the batch.
  Tensor forward_u(const Tensor& z, const Tensor& t, const Tensor& r, const Tensor& psi) const;
  Tensor forward_u(const Tensor& z, double t, double r, const Tensor& psi) const;
  /// Instantaneous velocity: forward_u at r = t.
  Tensor forward_v(const Tensor& z, const Tensor& t, const Tensor& psi) const;
  Tensor forward_v(const Tensor& z, double t, const Tensor& psi) const;

  /// phi_cond(t, r) as a 1 x hidden_dim row.
  Tensor phi_cond(double t, double r) const;

  num::DualTensor u_dual(const num::DualTensor& z, const num::DualTensor& t, const num::DualTensor& r,
                         const num::DualTensor& psi) const;
  num::Var u_tape(num::Tape& tape, const num::Var& z, const num::Var& t, const num::Var& r,
                  const num::Var& psi) const;

  // Validates shapes and the t >= r convention; returns psi expanded to the batch.
  Tensor check_inputs(const Tensor& z, const Tensor& t, const Tensor& r, const Tensor& psi) const;

 private:
  template <class Ctx>
  typename Ctx::value_type affine(Ctx& ctx, const std::string& prefix, const typename Ctx::value_type& x) const {
    const auto& w = ctx.param(prefix + ".weight", params_.at(prefix + ".weight"));
    const auto& b = ctx.param(prefix + ".bias", params_.at(prefix + ".bias"));
    return add_bias(matmul(x, w), b);
  }

  NetDims dims_;
  TimeEmbedConfig time_cfg_;
  NetMode mode_;
  num::ParamSet params_;
  std::vector<double> freqs_;
  std::vector<std::string> trunk_names_;
};

// Expected (name, shape) pairs for a given configuration, in name order.
std::vector<std::pair<std::string, num::Shape>> parameter_layout(const NetDims& dims, const TimeEmbedConfig& time_cfg,
                                                                 NetMode mode);

template <class Ctx>
typename Ctx::value_type VelocityNet::time_embedding(Ctx& ctx, const typename Ctx::value_type& t,
                                                     const typename Ctx::value_type& r) const {
  using num::sin_cos_features;
  using num::sub;
  if (mode_ == NetMode::fm) return affine(ctx, "time_embed", sin_cos_features(t, freqs_));
  auto end = affine(ctx, "end_embed", sin_cos_features(t, freqs_));
  auto interval = affine(ctx, "interval_embed", sin_cos_features(sub(t, r), freqs_));
  return add(interval, end);
}

template <class Ctx>
typename Ctx::value_type VelocityNet::apply(Ctx& ctx, const typename Ctx::value_type& z,
                                            const typename Ctx::value_type& t, const typename Ctx::value_type& r,
                                            const typename Ctx::value_type& psi) const {
  using num::concat_last_dim;
  using num::silu;
  auto phi = time_embedding(ctx, t, r);
  auto h = concat_last_dim(concat_last_dim(z, phi), psi);
  for (std::size_t i = 0; i + 1 < trunk_names_.size(); ++i) h = silu(affine(ctx, trunk_names_[i], h));
  return affine(ctx, trunk_names_.back(), h);
}

}  // namespace mflab::net
