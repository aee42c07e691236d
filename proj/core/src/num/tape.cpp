#include "mflab/num/tape.hpp"

#include <cmath>

#include "mflab/num/kernels.hpp"

namespace mflab::num {

namespace {

Tape& same_tape(const Var& a, const Var& b, std::string_view op) {
  if (&a.tape() != &b.tape()) throw Error(std::string(op) + ": operands live on different tapes");
  return a.tape();
}

// Gradient of sin_cos_features with respect to its (B x 1) input.
Tensor sin_cos_pullback(const Tensor& s, std::span<const double> freqs, const Tensor& g) {
  const std::size_t f = freqs.size();
  Tensor out({s.rows(), 1});
  for (std::size_t r = 0; r < s.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double w = freqs[j];
      acc += g.at(r, j) * w * std::cos(w * s[r]) - g.at(r, f + j) * w * std::sin(w * s[r]);
    }
    out[r] = acc;
  }
  return out;
}

}  // namespace

const Tensor& Var::value() const { return tape_->value(id_); }

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::parameter: return "parameter";
    case OpKind::constant: return "constant";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::add_bias: return "add_bias";
    case OpKind::mul_scalar: return "mul_scalar";
    case OpKind::matmul: return "matmul";
    case OpKind::concat_last_dim: return "concat_last_dim";
    case OpKind::silu: return "silu";
    case OpKind::sin_cos_features: return "sin_cos_features";
    case OpKind::mean: return "mean";
    case OpKind::sum_sq: return "sum_sq";
    case OpKind::custom: return "custom";
  }
  return "?";
}

Var Tape::param(const std::string& name, const Tensor& value) {
  nodes_.push_back(Node{OpKind::parameter, {}, value, 0.0, {}, name, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{OpKind::constant, {}, std::move(value), 0.0, {}, {}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind kind, std::vector<std::size_t> inputs, Tensor value, double scalar,
                 std::vector<double> aux, std::shared_ptr<const CustomOp> custom) {
  nodes_.push_back(Node{kind, std::move(inputs), std::move(value), scalar, std::move(aux), {}, std::move(custom)});
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(const Var& loss) const {
  if (&loss.tape() != this) throw Error("backward: loss node belongs to another tape");
  const Tensor& loss_value = nodes_.at(loss.id()).value;
  if (loss_value.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " + shape_str(loss_value.shape()));
  }

  std::vector<Tensor> adj(loss.id() + 1);
  std::vector<bool> has(loss.id() + 1, false);
  auto accumulate = [&](std::size_t id, Tensor g) {
    if (!has[id]) {
      adj[id] = std::move(g);
      has[id] = true;
    } else {
      axpy_inplace(adj[id], 1.0, g);
    }
  };
  accumulate(loss.id(), Tensor(loss_value.shape(), 1.0));

  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (!has[i]) continue;
    const Node& n = nodes_[i];
    const Tensor& g = adj[i];
    auto in = [&](std::size_t k) -> const Tensor& { return nodes_[n.inputs[k]].value; };
    switch (n.kind) {
      case OpKind::parameter:
      case OpKind::constant:
        break;
      case OpKind::add:
        accumulate(n.inputs[0], g);
        accumulate(n.inputs[1], g);
        break;
      case OpKind::sub:
        accumulate(n.inputs[0], g);
        accumulate(n.inputs[1], mul_scalar(g, -1.0));
        break;
      case OpKind::add_bias:
        accumulate(n.inputs[0], g);
        accumulate(n.inputs[1], column_sums(g));
        break;
      case OpKind::mul_scalar:
        accumulate(n.inputs[0], mul_scalar(g, n.scalar));
        break;
      case OpKind::matmul:
        accumulate(n.inputs[0], matmul(g, transpose(in(1))));
        accumulate(n.inputs[1], matmul(transpose(in(0)), g));
        break;
      case OpKind::concat_last_dim: {
        auto [left, right] = split_last_dim(g, in(0).cols());
        accumulate(n.inputs[0], std::move(left));
        accumulate(n.inputs[1], std::move(right));
        break;
      }
      case OpKind::silu:
        accumulate(n.inputs[0], hadamard(g, silu_grad(in(0))));
        break;
      case OpKind::sin_cos_features:
        accumulate(n.inputs[0], sin_cos_pullback(in(0), n.aux, g));
        break;
      case OpKind::mean:
        accumulate(n.inputs[0], Tensor(in(0).shape(), g.item() / static_cast<double>(in(0).size())));
        break;
      case OpKind::sum_sq:
        accumulate(n.inputs[0], mul_scalar(in(0), 2.0 * g.item()));
        break;
      case OpKind::custom: {
        if (!n.custom->vjp) throw MissingRuleError("primitive '" + n.custom->name + "' has no backward rule");
        std::vector<Tensor> inputs;
        inputs.reserve(n.inputs.size());
        for (std::size_t k = 0; k < n.inputs.size(); ++k) inputs.push_back(in(k));
        auto grads = n.custom->vjp(inputs, n.value, g);
        if (grads.size() != n.inputs.size())
          throw ShapeError("primitive '" + n.custom->name + "' backward returned the wrong number of adjoints");
        for (std::size_t k = 0; k < grads.size(); ++k) {
          require_same_shape(n.custom->name, inputs[k], grads[k]);
          accumulate(n.inputs[k], std::move(grads[k]));
        }
        break;
      }
    }
  }

  Gradients grads;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.kind != OpKind::parameter) continue;
    const bool reached = i < has.size() && has[i];
    auto it = grads.find(n.name);
    if (it == grads.end()) {
      grads.emplace(n.name, reached ? adj[i] : Tensor::zeros_like(n.value));
    } else if (reached) {
      axpy_inplace(it->second, 1.0, adj[i]);
    }
  }
  return grads;
}

Var add(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b, "add");
  return t.record(OpKind::add, {a.id(), b.id()}, add(a.value(), b.value()));
}

Var sub(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b, "sub");
  return t.record(OpKind::sub, {a.id(), b.id()}, sub(a.value(), b.value()));
}

Var add_bias(const Var& a, const Var& bias) {
  Tape& t = same_tape(a, bias, "add_bias");
  return t.record(OpKind::add_bias, {a.id(), bias.id()}, add_bias(a.value(), bias.value()));
}

Var mul_scalar(const Var& a, double s) {
  return a.tape().record(OpKind::mul_scalar, {a.id()}, mul_scalar(a.value(), s), s);
}

Var matmul(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b, "matmul");
  return t.record(OpKind::matmul, {a.id(), b.id()}, matmul(a.value(), b.value()));
}

Var concat_last_dim(const Var& a, const Var& b) {
  Tape& t = same_tape(a, b, "concat_last_dim");
  return t.record(OpKind::concat_last_dim, {a.id(), b.id()}, concat_last_dim(a.value(), b.value()));
}

Var silu(const Var& a) { return a.tape().record(OpKind::silu, {a.id()}, silu(a.value())); }

Var sin_cos_features(const Var& s, std::span<const double> freqs) {
  return s.tape().record(OpKind::sin_cos_features, {s.id()}, sin_cos_features(s.value(), freqs), 0.0,
                         std::vector<double>(freqs.begin(), freqs.end()));
}

Var mean(const Var& a) { return a.tape().record(OpKind::mean, {a.id()}, mean(a.value())); }

Var sum_sq(const Var& a) { return a.tape().record(OpKind::sum_sq, {a.id()}, sum_sq(a.value())); }

Var apply_custom(std::shared_ptr<const CustomOp> op, std::span<const Var> inputs) {
  if (inputs.empty()) throw Error("apply_custom: no inputs");
  if (!op->eval) throw MissingRuleError("primitive '" + op->name + "' has no evaluation rule");
  Tape& t = inputs.front().tape();
  std::vector<Tensor> values;
  std::vector<std::size_t> ids;
  for (const Var& v : inputs) {
    if (&v.tape() != &t) throw Error(op->name + ": operands live on different tapes");
    values.push_back(v.value());
    ids.push_back(v.id());
  }
  Tensor out = op->eval(values);
  return t.record(OpKind::custom, std::move(ids), std::move(out), 0.0, {}, std::move(op));
}

}  // namespace mflab::num
