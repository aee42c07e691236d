#include "mflab/enc/synthetic.hpp"

#include <cmath>

#include "mflab/enc/analysis.hpp"
#include "mflab/num/rng.hpp"

namespace mflab::enc {

namespace {

double mean_pairwise_distance(const std::vector<std::vector<double>>& points) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < points[i].size(); ++k) s += (points[i][k] - points[j][k]) * (points[i][k] - points[j][k]);
      acc += std::sqrt(s);
      ++n;
    }
  return n ? acc / static_cast<double>(n) : 0.0;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Json spec_to_json(const SyntheticEmbedSpec& s) {
  return Json{{"n_attributes", s.n_attributes}, {"values_per_attribute", s.values_per_attribute},
              {"dim", s.dim},                   {"separation", s.separation},
              {"mode", std::string(to_string(s.mode))}, {"tokens_per_attribute", s.tokens_per_attribute}};
}

SyntheticEmbedSpec spec_from_json(const Json& j) {
  SyntheticEmbedSpec s;
  s.n_attributes = j.at("n_attributes").get<std::size_t>();
  s.values_per_attribute = j.at("values_per_attribute").get<std::size_t>();
  s.dim = j.at("dim").get<std::size_t>();
  s.separation = j.at("separation").get<double>();
  s.mode = parse_embed_mode(j.at("mode").get<std::string>());
  s.tokens_per_attribute = j.at("tokens_per_attribute").get<std::size_t>();
  return s;
}

}  // namespace

std::string_view to_string(EmbedMode mode) { return mode == EmbedMode::disentangled ? "disentangled" : "entangled"; }

EmbedMode parse_embed_mode(std::string_view text) {
  if (text == "disentangled") return EmbedMode::disentangled;
  if (text == "entangled") return EmbedMode::entangled;
  throw ValidationError("unknown embedding mode '" + std::string(text) + "' (expected disentangled or entangled)");
}

void SyntheticEmbedSpec::validate() const {
  if (n_attributes == 0 || values_per_attribute == 0) throw ValidationError("embedding spec needs attributes and values");
  if (!(separation > 0.0)) throw ValidationError("embedding separation must be positive");
  if (tokens_per_attribute == 0) throw ValidationError("tokens_per_attribute must be at least 1");
  if (dim / n_attributes < values_per_attribute) {
    throw ValidationError("embedding dim " + std::to_string(dim) + " is too small to host " +
                          std::to_string(n_attributes) + " one-hot blocks of " + std::to_string(values_per_attribute) +
                          " values");
  }
}

const ConditionEmbedding& ConditionTable::at(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return e;
  throw ValidationError("unknown condition id '" + id + "'");
}

Tensor ConditionTable::psi_row(const std::string& id) const { return Tensor::row(at(id).psi); }

Json ConditionTable::to_json() const {
  Json list = Json::array();
  for (const auto& e : entries) {
    list.push_back(Json{{"id", e.id}, {"tuple", e.tuple}, {"psi", e.psi}, {"tokens", tensor_to_json(e.tokens)}});
  }
  return Json{{"format", "mflab.condition_table"}, {"version", 1}, {"spec", spec_to_json(spec)},
              {"seed", seed}, {"entries", list}};
}

ConditionTable ConditionTable::from_json(const Json& j) {
  try {
    if (j.value("format", std::string()) != "mflab.condition_table")
      throw ValidationError("not an mflab condition table");
    ConditionTable t;
    t.spec = spec_from_json(j.at("spec"));
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("entries")) {
      ConditionEmbedding ce;
      ce.id = e.at("id").get<std::string>();
      ce.tuple = e.at("tuple").get<ConditionTuple>();
      ce.psi = e.at("psi").get<std::vector<double>>();
      ce.tokens = tensor_from_json(e.at("tokens"), "condition table tokens");
      t.entries.push_back(std::move(ce));
    }
    return t;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed condition table: ") + e.what());
  }
}

ConditionTable gen_synthetic_embeddings(const SyntheticEmbedSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto tuples = enumerate_conditions(spec.n_attributes, spec.values_per_attribute);
  const std::size_t block = spec.dim / spec.n_attributes;
  const std::size_t n_tokens = spec.n_attributes * spec.tokens_per_attribute;

  ConditionTable table;
  table.spec = spec;
  table.seed = seed;

  std::vector<std::vector<double>> disentangled_psi;
  for (const auto& tuple : tuples) {
    std::vector<double> psi(spec.dim, 0.0);
    for (std::size_t a = 0; a < spec.n_attributes; ++a) psi[a * block + static_cast<std::size_t>(tuple[a])] = spec.separation;
    disentangled_psi.push_back(std::move(psi));
  }

  if (spec.mode == EmbedMode::disentangled) {
    const double token_scale = spec.separation * static_cast<double>(spec.n_attributes);
    for (std::size_t c = 0; c < tuples.size(); ++c) {
      Tensor tokens({n_tokens, spec.dim});
      for (std::size_t a = 0; a < spec.n_attributes; ++a)
        for (std::size_t k = 0; k < spec.tokens_per_attribute; ++k)
          tokens.at(a * spec.tokens_per_attribute + k, a * block + static_cast<std::size_t>(tuples[c][a])) = token_scale;
      table.entries.push_back({tuples[c], condition_id(tuples[c]), disentangled_psi[c], std::move(tokens)});
    }
    return table;
  }

  num::Rng rng(seed);
  std::vector<Tensor> raw_tokens;
  std::vector<std::vector<double>> raw_psi;
  for (std::size_t c = 0; c < tuples.size(); ++c) {
    raw_tokens.push_back(rng.normal_tensor({n_tokens, spec.dim}));
    raw_psi.push_back(mean_pool(raw_tokens.back()));
  }
  double scale;
  if (tuples.size() > 1) {
    scale = mean_pairwise_distance(disentangled_psi) / mean_pairwise_distance(raw_psi);
  } else {
    scale = norm(disentangled_psi.front()) / norm(raw_psi.front());
  }
  for (std::size_t c = 0; c < tuples.size(); ++c) {
    for (double& v : raw_tokens[c].data()) v *= scale;
    table.entries.push_back({tuples[c], condition_id(tuples[c]), mean_pool(raw_tokens[c]), std::move(raw_tokens[c])});
  }
  return table;
}

Corpus synthetic_corpus(const ConditionTable& table, const SyntheticCorpusSpec& spec, std::uint64_t seed) {
  if (spec.records_per_condition == 0 || spec.vision_dim == 0)
    throw ValidationError("synthetic corpus needs records and a vision dimension");
  num::Rng rng(seed);
  std::vector<std::vector<double>> prototypes;
  for (std::size_t c = 0; c < table.entries.size(); ++c) {
    std::vector<double> p(spec.vision_dim);
    for (double& v : p) v = rng.normal();
    const double n = norm(p);
    for (double& v : p) v /= n;
    prototypes.push_back(std::move(p));
  }
  std::vector<EmbeddingRecord> records;
  for (std::size_t c = 0; c < table.entries.size(); ++c) {
    const auto& entry = table.entries[c];
    for (std::size_t k = 0; k < spec.records_per_condition; ++k) {
      EmbeddingRecord r;
      r.id = entry.id + "-" + std::to_string(k);
      r.text = "prompt " + std::to_string(k) + " for " + entry.id;
      r.token_embeddings = entry.tokens;
      for (double& v : r.token_embeddings.data()) v += spec.token_noise * rng.normal();
      std::vector<double> vision = prototypes[c];
      for (double& v : vision) v += spec.vision_noise * rng.normal();
      r.vision_embedding = std::move(vision);
      std::vector<double> image = entry.psi;
      for (double& v : image) v += spec.token_noise * rng.normal();
      r.image_embedding = std::move(image);
      records.push_back(std::move(r));
    }
  }
  return Corpus(std::move(records));
}

}  // namespace mflab::enc
