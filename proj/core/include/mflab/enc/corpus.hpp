#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mflab/num/tensor.hpp"

namespace mflab::enc {

using num::Tensor;

/// One corpus entry: a token-embedding sequence (L_seq x D) plus optional
/// paired image embedding and vision-backbone embedding of the paired image.
struct EmbeddingRecord {
  std::string id;
  Tensor token_embeddings;
  std::optional<std::vector<double>> image_embedding;
  std::optional<std::vector<double>> vision_embedding;
  std::optional<std::string> text;
};

struct CorpusDims {
  std::size_t token_dim = 0;
  std::optional<std::size_t> image_dim;
  std::optional<std::size_t> vision_dim;
};

inline constexpr int kCorpusFormatVersion = 1;

/// Immutable collection of records with unique ids and a uniform token
/// dimension. Mean-pooled text embeddings are computed once on construction.
class Corpus {
 public:
  explicit Corpus(std::vector<EmbeddingRecord> records);

  const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  const CorpusDims& dims() const noexcept { return dims_; }
  const EmbeddingRecord& at(std::size_t i) const { return records_.at(i); }
  const EmbeddingRecord& by_id(const std::string& id) const;
  const std::vector<double>& pooled(std::size_t i) const { return pooled_.at(i); }

 private:
  std::vector<EmbeddingRecord> records_;
  std::vector<std::vector<double>> pooled_;
  std::unordered_map<std::string, std::size_t> index_;
  CorpusDims dims_;
};

/// JSONL: a header line {"format": "mflab.corpus", "version": 1, "token_dim": D,
/// "image_dim": ..., "vision_dim": ..., "count": N} followed by one record per
/// line with fields id, token_embeddings, and optional image_embedding,
/// vision_embedding, text.
Corpus parse_corpus_jsonl(const std::string& content);
std::string corpus_to_jsonl(const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace mflab::enc
