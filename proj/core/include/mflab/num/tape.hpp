#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mflab/num/custom_op.hpp"
#include "mflab/num/params.hpp"
#include "mflab/num/tensor.hpp"

namespace mflab::num {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  const Tensor& value() const;
  std::size_t id() const noexcept { return id_; }
  Tape& tape() const noexcept { return *tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_;
  std::size_t id_;
};

enum class OpKind : std::uint8_t {
  parameter,
  constant,
  add,
  sub,
  add_bias,
  mul_scalar,
  matmul,
  concat_last_dim,
  silu,
  sin_cos_features,
  mean,
  sum_sq,
  custom,
};

std::string_view op_name(OpKind kind);

/// Reverse-mode recorder. Nodes are appended in evaluation order, so the
/// recorded order is already topological; backward() walks it once in reverse.
class Tape {
 public:
  using value_type = Var;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that receives a gradient under `name`.
  Var param(const std::string& name, const Tensor& value);
  // Leaf that is treated as constant (no gradient, e.g. stop-gradient targets).
  Var constant(Tensor value);

  Var record(OpKind kind, std::vector<std::size_t> inputs, Tensor value, double scalar = 0.0,
             std::vector<double> aux = {}, std::shared_ptr<const CustomOp> custom = nullptr);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }

  /// Gradient of a single-element node with respect to every parameter leaf on
  /// the tape. Parameters the loss does not depend on get zero gradients.
  Gradients backward(const Var& loss) const;

 private:
  struct Node {
    OpKind kind;
    std::vector<std::size_t> inputs;
    Tensor value;
    double scalar = 0.0;
    std::vector<double> aux;
    std::string name;
    std::shared_ptr<const CustomOp> custom;
  };
  std::vector<Node> nodes_;
};

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var add_bias(const Var& a, const Var& bias);
Var mul_scalar(const Var& a, double s);
Var matmul(const Var& a, const Var& b);
Var concat_last_dim(const Var& a, const Var& b);
Var silu(const Var& a);
Var sin_cos_features(const Var& s, std::span<const double> freqs);
Var mean(const Var& a);
Var sum_sq(const Var& a);
Var apply_custom(std::shared_ptr<const CustomOp> op, std::span<const Var> inputs);

}  // namespace mflab::num
