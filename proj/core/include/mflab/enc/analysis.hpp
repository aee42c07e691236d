#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mflab/enc/corpus.hpp"
#include "mflab/json_io.hpp"
#include "mflab/num/rng.hpp"

namespace mflab::enc {

// (1 / L_seq) * sum of the token rows.
std::vector<double> mean_pool(const Tensor& token_embeddings);

// <a, b> / (|a| |b|); throws ValidationError for a zero-norm vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
// 1 - cosine_similarity, in [0, 2].
double cosine_distance(std::span<const double> a, std::span<const double> b);

enum class RetrievalMode { text_to_text, text_to_image };
std::string_view to_string(RetrievalMode mode);
RetrievalMode parse_retrieval_mode(std::string_view text);

struct RetrievalHit {
  std::string id;
  double similarity = 0.0;
};

/// Top-k corpus records by cosine similarity to the query's pooled text
/// embedding. text_to_text compares pooled text embeddings; text_to_image
/// compares against each record's image embedding. Ties break by ascending id.
/// Records whose id equals `exclude_id` are skipped.
std::vector<RetrievalHit> retrieve_topk(const EmbeddingRecord& query, const Corpus& corpus, std::size_t k,
                                        RetrievalMode mode = RetrievalMode::text_to_text,
                                        std::string_view exclude_id = {});

struct ScoreEntry {
  std::string id;
  double score = 0.0;
};

struct ScoreReport {
  double score = 0.0;  // unweighted mean of the entries
  std::vector<ScoreEntry> entries;
  Json to_json() const;
};

/// Seeded uniform subset of record ids (without replacement); count >= size
/// returns every id in corpus order.
std::vector<std::string> select_queries(const Corpus& corpus, std::size_t count, std::uint64_t seed);

/// For each query: retrieve top-k (excluding the query itself) and average the
/// cosine similarity between the retrieved records' vision embeddings and the
/// query's vision embedding. The score is the mean over queries.
ScoreReport discriminability_score(const Corpus& corpus, const std::vector<std::string>& query_ids, std::size_t k,
                                   RetrievalMode mode = RetrievalMode::text_to_text);

/// Removes round(rho * L_seq) token rows chosen uniformly without replacement,
/// always keeping at least one. Requires 0 < rho < 1 and L_seq >= 2.
EmbeddingRecord ablate_tokens(const EmbeddingRecord& record, double rho, num::Rng& rng);

/// Mean over records of cosine_similarity(mean_pool(original), mean_pool(ablated)).
/// Each record is ablated with a stream derived from (seed, hash(record id))
/// after sorting its token rows lexicographically, so the score does not
/// depend on record order or on the order of tokens within a record.
ScoreReport disentanglement_score(const Corpus& corpus, double rho, std::uint64_t seed);

}  // namespace mflab::enc
