#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mflab {

// An attribute-value tuple, one entry per attribute.
using ConditionTuple = std::vector<int>;

// All tuples in lexicographic order (last attribute varies fastest).
std::vector<ConditionTuple> enumerate_conditions(std::size_t n_attributes, std::size_t values_per_attribute);

// "c0_1" for (0, 1).
std::string condition_id(const ConditionTuple& tuple);
ConditionTuple parse_condition_id(const std::string& id);

}  // namespace mflab
