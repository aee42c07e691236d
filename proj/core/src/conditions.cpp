#include "mflab/conditions.hpp"

#include "mflab/errors.hpp"

namespace mflab {

std::vector<ConditionTuple> enumerate_conditions(std::size_t n_attributes, std::size_t values_per_attribute) {
  if (n_attributes == 0 || values_per_attribute == 0)
    throw ValidationError("condition layout needs at least one attribute and one value");
  std::vector<ConditionTuple> out;
  ConditionTuple cur(n_attributes, 0);
  while (true) {
    out.push_back(cur);
    std::size_t i = n_attributes;
    while (i > 0) {
      --i;
      if (static_cast<std::size_t>(++cur[i]) < values_per_attribute) break;
      cur[i] = 0;
      if (i == 0) return out;
    }
  }
}

std::string condition_id(const ConditionTuple& tuple) {
  std::string s = "c";
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i) s += '_';
    s += std::to_string(tuple[i]);
  }
  return s;
}

ConditionTuple parse_condition_id(const std::string& id) {
  if (id.size() < 2 || id[0] != 'c') throw ValidationError("malformed condition id '" + id + "'");
  ConditionTuple out;
  std::size_t pos = 1;
  while (pos <= id.size()) {
    const std::size_t next = id.find('_', pos);
    const std::string part = id.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw ValidationError("malformed condition id '" + id + "'");
    out.push_back(std::stoi(part));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace mflab
