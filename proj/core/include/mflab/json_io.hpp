#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "mflab/num/params.hpp"
#include "mflab/num/tensor.hpp"

namespace mflab {

using Json = nlohmann::json;

// {"shape": [...], "data": [...]}. nlohmann emits the shortest decimal that
// round-trips, so doubles survive save/load bitwise.
Json tensor_to_json(const num::Tensor& t);
num::Tensor tensor_from_json(const Json& j, const std::string& what);
Json params_to_json(const num::ParamSet& params);
num::ParamSet params_from_json(const Json& j, const std::string& what);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see partial output.
void write_text_file(const std::filesystem::path& path, const std::string& content);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j, int indent = 2);

}  // namespace mflab
