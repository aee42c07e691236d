#pragma once

#include <map>
#include <string>

#include "mflab/num/tensor.hpp"

namespace mflab::num {

// Named parameter tensors, ordered by name so iteration is deterministic.
using ParamSet = std::map<std::string, Tensor>;
// Gradients share the parameter naming.
using Gradients = ParamSet;

std::size_t parameter_count(const ParamSet& params);
ParamSet zeros_like(const ParamSet& params);
void check_finite(const ParamSet& params, std::string_view context);

}  // namespace mflab::num
