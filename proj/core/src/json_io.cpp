#include "mflab/json_io.hpp"

#include <fstream>
#include <sstream>

namespace mflab {

Json tensor_to_json(const num::Tensor& t) { return Json{{"shape", t.shape()}, {"data", t.vec()}}; }

num::Tensor tensor_from_json(const Json& j, const std::string& what) {
  try {
    auto shape = j.at("shape").get<num::Shape>();
    auto data = j.at("data").get<std::vector<double>>();
    return num::Tensor(std::move(shape), std::move(data));
  } catch (const Json::exception& e) {
    throw ValidationError(what + ": malformed tensor (" + e.what() + ")");
  }
}

Json params_to_json(const num::ParamSet& params) {
  Json j = Json::object();
  for (const auto& [name, t] : params) j[name] = tensor_to_json(t);
  return j;
}

num::ParamSet params_from_json(const Json& j, const std::string& what) {
  if (!j.is_object()) throw ValidationError(what + ": expected an object of named tensors");
  num::ParamSet out;
  for (const auto& [name, value] : j.items()) out.emplace(name, tensor_from_json(value, what + "." + name));
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw ValidationError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out) throw ValidationError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j, int indent) {
  write_text_file(path, j.dump(indent) + "\n");
}

}  // namespace mflab
