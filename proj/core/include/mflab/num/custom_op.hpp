#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mflab/num/tensor.hpp"

namespace mflab::num {

/// A user-supplied primitive. Either differentiation rule may be left empty;
/// the engine that needs a missing rule raises MissingRuleError naming `name`.
struct CustomOp {
  std::string name;
  std::function<Tensor(std::span<const Tensor> inputs)> eval;
  // Adjoints of the inputs given the inputs, the output and the output adjoint.
  std::function<std::vector<Tensor>(std::span<const Tensor> inputs, const Tensor& output,
                                    const Tensor& output_adjoint)>
      vjp;
  // Output tangent given the inputs and their tangents.
  std::function<Tensor(std::span<const Tensor> inputs, std::span<const Tensor> tangents)> jvp;
};

}  // namespace mflab::num
