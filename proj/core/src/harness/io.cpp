#include "mflab/harness/io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "mflab/errors.hpp"

namespace mflab::harness {

namespace {

std::vector<double> row_vector(const Tensor& t, std::size_t i) {
  auto s = t.row_span(i);
  return {s.begin(), s.end()};
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError("metrics csv: cannot parse " + what + " value '" + text + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void SampleSet::append(const std::string& condition, const Tensor& points) {
  if (data_dim == 0) data_dim = points.cols();
  if (points.cols() != data_dim)
    throw ShapeError("sample set holds " + std::to_string(data_dim) + "-d points, got " + std::to_string(points.cols()));
  for (std::size_t i = 0; i < points.rows(); ++i) records.push_back({condition, row_vector(points, i), {}});
}

void SampleSet::append(const std::string& condition, const sample::SampleRun& run) {
  const std::size_t first = records.size();
  append(condition, run.samples);
  if (run.intermediates.empty()) return;
  for (std::size_t i = 0; i < run.samples.rows(); ++i) {
    auto& path = records[first + i].path;
    for (const Tensor& state : run.intermediates) path.push_back(row_vector(state, i));
  }
}

bool SampleSet::has_paths() const {
  return !records.empty() && std::all_of(records.begin(), records.end(), [](const auto& r) { return !r.path.empty(); });
}

std::string sample_set_to_jsonl(const SampleSet& set) {
  Json header{{"format", "mflab.samples"},
              {"version", 1},
              {"kind", set.kind},
              {"config_digest", set.config_digest},
              {"config", set.config},
              {"data_dim", set.data_dim},
              {"steps", set.steps ? Json(*set.steps) : Json(nullptr)},
              {"count", set.records.size()}};
  std::string out = header.dump() + "\n";
  for (const auto& r : set.records) {
    Json line{{"condition", r.condition}, {"x", r.x}};
    if (!r.path.empty()) line["path"] = r.path;
    out += line.dump();
    out += '\n';
  }
  return out;
}

SampleSet parse_sample_set(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("sample file is empty");
  SampleSet set;
  std::size_t count = 0;
  try {
    const Json header = Json::parse(line);
    if (header.value("format", std::string()) != "mflab.samples")
      throw ValidationError("not an mflab sample file (missing format header)");
    if (header.at("version").get<int>() != 1) throw ValidationError("unsupported sample file version");
    set.kind = header.at("kind").get<std::string>();
    set.config_digest = header.at("config_digest").get<std::string>();
    set.config = header.at("config");
    set.data_dim = header.at("data_dim").get<std::size_t>();
    if (!header.at("steps").is_null()) set.steps = header.at("steps").get<std::size_t>();
    count = header.at("count").get<std::size_t>();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const Json j = Json::parse(line);
      SampleRecord r{j.at("condition").get<std::string>(), j.at("x").get<std::vector<double>>(), {}};
      if (j.contains("path")) r.path = j.at("path").get<std::vector<std::vector<double>>>();
      if (r.x.size() != set.data_dim)
        throw ShapeError("sample file line " + std::to_string(lineno) + ": point has dimension " +
                         std::to_string(r.x.size()) + ", header says " + std::to_string(set.data_dim));
      for (const auto& p : r.path)
        if (p.size() != set.data_dim)
          throw ShapeError("sample file line " + std::to_string(lineno) + ": trajectory state has the wrong dimension");
      set.records.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed sample file: ") + e.what());
  }
  if (set.records.size() != count)
    throw ValidationError("sample file header announces " + std::to_string(count) + " records, found " +
                          std::to_string(set.records.size()));
  return set;
}

void save_sample_set(const SampleSet& set, const std::filesystem::path& path) {
  write_text_file(path, sample_set_to_jsonl(set));
}

SampleSet load_sample_set(const std::filesystem::path& path) { return parse_sample_set(read_text_file(path)); }

std::vector<sample::ConditionSamples> group_by_condition(const SampleSet& set) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SampleRecord*>> groups;
  for (const auto& r : set.records) {
    auto [it, inserted] = groups.try_emplace(r.condition);
    if (inserted) order.push_back(r.condition);
    it->second.push_back(&r);
  }
  std::vector<sample::ConditionSamples> out;
  for (const auto& id : order) {
    const auto& rows = groups.at(id);
    Tensor t({rows.size(), set.data_dim});
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i]->x.begin(), rows[i]->x.end(), t.row_span(i).begin());
    sample::ConditionSamples cs;
    cs.condition_id = id;
    cs.samples = std::move(t);
    out.push_back(std::move(cs));
  }
  return out;
}

std::vector<std::pair<std::string, sample::SampleRun>> trajectories_by_condition(const SampleSet& set) {
  if (!set.has_paths()) throw ValidationError("sample set has no recorded trajectories");
  std::vector<std::pair<std::string, sample::SampleRun>> out;
  std::map<std::string, std::vector<const SampleRecord*>> groups;
  std::vector<std::string> order;
  for (const auto& r : set.records) {
    auto [it, inserted] = groups.try_emplace(r.condition);
    if (inserted) order.push_back(r.condition);
    it->second.push_back(&r);
  }
  for (const auto& id : order) {
    const auto& rows = groups.at(id);
    const std::size_t states = rows.front()->path.size();
    sample::SampleRun run;
    run.steps = states - 1;
    for (std::size_t s = 0; s < states; ++s) {
      Tensor state({rows.size(), set.data_dim});
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i]->path.size() != states) throw ValidationError("trajectories of " + id + " differ in length");
        std::copy(rows[i]->path[s].begin(), rows[i]->path[s].end(), state.row_span(i).begin());
      }
      run.intermediates.push_back(std::move(state));
    }
    run.samples = run.intermediates.back();
    out.emplace_back(id, std::move(run));
  }
  return out;
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows, const std::vector<std::size_t>& step_counts,
                           const std::string& config_digest) {
  std::string out = "# config_digest=" + config_digest + "\nstep,loss";
  for (std::size_t s : step_counts) out += ",fidelity_" + std::to_string(s);
  out += ",energy_distance,curvature\n";
  std::int64_t prev = -1;
  for (const auto& r : rows) {
    if (r.step <= prev) throw ValidationError("metrics rows must be strictly increasing in step");
    prev = r.step;
    out += std::to_string(r.step) + "," + format_double(r.loss);
    for (std::size_t s : step_counts) {
      out += ",";
      if (auto it = r.fidelity.find(s); it != r.fidelity.end()) out += format_double(it->second);
    }
    out += ",";
    if (r.energy_distance) out += format_double(*r.energy_distance);
    out += ",";
    if (r.curvature) out += format_double(*r.curvature);
    out += "\n";
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& content, std::string* config_digest) {
  std::istringstream in(content);
  std::string line;
  std::vector<std::string> header;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string key = "# config_digest=";
      if (config_digest && line.rfind(key, 0) == 0) *config_digest = line.substr(key.size());
      continue;
    }
    if (header.empty()) {
      header = split_csv(line);
      if (header.size() < 4 || header[0] != "step" || header[1] != "loss")
        throw ValidationError("metrics csv: unexpected header '" + line + "'");
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw ValidationError("metrics csv: ragged row '" + line + "'");
    MetricsRow r;
    r.step = static_cast<std::int64_t>(parse_double(cells[0], "step"));
    r.loss = parse_double(cells[1], "loss");
    for (std::size_t c = 2; c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      const double v = parse_double(cells[c], header[c]);
      if (header[c].rfind("fidelity_", 0) == 0) {
        r.fidelity[std::stoul(header[c].substr(9))] = v;
      } else if (header[c] == "energy_distance") {
        r.energy_distance = v;
      } else if (header[c] == "curvature") {
        r.curvature = v;
      } else {
        throw ValidationError("metrics csv: unknown column '" + header[c] + "'");
      }
    }
    if (!rows.empty() && r.step <= rows.back().step)
      throw ValidationError("metrics csv: steps must be strictly increasing");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mflab::harness
