#include "mflab/enc/corpus.hpp"

#include <cmath>
#include <sstream>

#include "mflab/enc/analysis.hpp"
#include "mflab/json_io.hpp"

namespace mflab::enc {

namespace {

void require_finite(const std::vector<double>& v, const std::string& what) {
  for (double x : v)
    if (!std::isfinite(x)) throw ValidationError(what + " contains a non-finite value");
}

void check_optional_dim(std::optional<std::size_t>& dim, const std::optional<std::vector<double>>& v,
                        const std::string& field, const std::string& id) {
  if (!v) return;
  require_finite(*v, "record '" + id + "' " + field);
  if (v->empty()) throw ValidationError("record '" + id + "' has an empty " + field);
  if (!dim) dim = v->size();
  if (*dim != v->size()) throw ValidationError("record '" + id + "' " + field + " has inconsistent dimension");
}

}  // namespace

Corpus::Corpus(std::vector<EmbeddingRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.id.empty()) throw ValidationError("corpus record " + std::to_string(i) + " has an empty id");
    if (!index_.emplace(r.id, i).second) throw ValidationError("duplicate corpus id '" + r.id + "'");
    num::require_matrix("corpus record '" + r.id + "'", r.token_embeddings);
    if (!r.token_embeddings.all_finite())
      throw ValidationError("record '" + r.id + "' token embeddings contain a non-finite value");
    if (i == 0) dims_.token_dim = r.token_embeddings.cols();
    if (r.token_embeddings.cols() != dims_.token_dim)
      throw ValidationError("record '" + r.id + "' token dimension differs from the corpus");
    check_optional_dim(dims_.image_dim, r.image_embedding, "image_embedding", r.id);
    check_optional_dim(dims_.vision_dim, r.vision_embedding, "vision_embedding", r.id);
    pooled_.push_back(mean_pool(r.token_embeddings));
  }
}

const EmbeddingRecord& Corpus::by_id(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("unknown corpus id '" + id + "'");
  return records_[it->second];
}

Corpus parse_corpus_jsonl(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<EmbeddingRecord> records;
  std::optional<std::size_t> declared_count;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ValidationError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      if (!have_header) {
        if (j.value("format", std::string()) != "mflab.corpus")
          throw ValidationError("corpus must start with an mflab.corpus header line");
        if (j.at("version").get<int>() != kCorpusFormatVersion)
          throw ValidationError("unsupported corpus version");
        if (j.contains("count")) declared_count = j.at("count").get<std::size_t>();
        have_header = true;
        continue;
      }
      EmbeddingRecord r;
      r.id = j.at("id").get<std::string>();
      auto rows = j.at("token_embeddings").get<std::vector<std::vector<double>>>();
      if (rows.empty()) throw ValidationError("record '" + r.id + "' has an empty token sequence");
      r.token_embeddings = num::stack_rows(rows);
      if (j.contains("image_embedding") && !j["image_embedding"].is_null())
        r.image_embedding = j["image_embedding"].get<std::vector<double>>();
      if (j.contains("vision_embedding") && !j["vision_embedding"].is_null())
        r.vision_embedding = j["vision_embedding"].get<std::vector<double>>();
      if (j.contains("text") && !j["text"].is_null()) r.text = j["text"].get<std::string>();
      records.push_back(std::move(r));
    } catch (const Json::exception& e) {
      throw ValidationError("corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ShapeError& e) {
      throw ValidationError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw ValidationError("corpus is empty (missing header line)");
  if (declared_count && *declared_count != records.size())
    throw ValidationError("corpus header declares " + std::to_string(*declared_count) + " records, found " +
                          std::to_string(records.size()));
  return Corpus(std::move(records));
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  Json header{{"format", "mflab.corpus"}, {"version", kCorpusFormatVersion},
              {"token_dim", corpus.dims().token_dim}, {"count", corpus.size()}};
  header["image_dim"] = corpus.dims().image_dim ? Json(*corpus.dims().image_dim) : Json(nullptr);
  header["vision_dim"] = corpus.dims().vision_dim ? Json(*corpus.dims().vision_dim) : Json(nullptr);
  std::string out = header.dump() + "\n";
  for (const auto& r : corpus.records()) {
    Json j;
    j["id"] = r.id;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r.token_embeddings.rows(); ++i) {
      auto s = r.token_embeddings.row_span(i);
      rows.emplace_back(s.begin(), s.end());
    }
    j["token_embeddings"] = rows;
    if (r.image_embedding) j["image_embedding"] = *r.image_embedding;
    if (r.vision_embedding) j["vision_embedding"] = *r.vision_embedding;
    if (r.text) j["text"] = *r.text;
    out += j.dump() + "\n";
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& path) { return parse_corpus_jsonl(read_text_file(path)); }

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_text_file(path, corpus_to_jsonl(corpus));
}

}  // namespace mflab::enc
