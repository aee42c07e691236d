#include "mflab/enc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mflab::enc {

std::vector<double> mean_pool(const Tensor& token_embeddings) {
  num::require_matrix("mean_pool", token_embeddings);
  const std::size_t l = token_embeddings.rows(), d = token_embeddings.cols();
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < l; ++i) {
    auto row = token_embeddings.row_span(i);
    for (std::size_t j = 0; j < d; ++j) out[j] += row[j];
  }
  for (double& v : out) v /= static_cast<double>(l);
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_similarity: dimension mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine similarity of a zero-norm vector is undefined");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  return 1.0 - cosine_similarity(a, b);
}

std::string_view to_string(RetrievalMode mode) {
  return mode == RetrievalMode::text_to_text ? "text-to-text" : "text-to-image";
}

RetrievalMode parse_retrieval_mode(std::string_view text) {
  if (text == "text-to-text" || text == "text") return RetrievalMode::text_to_text;
  if (text == "text-to-image" || text == "image") return RetrievalMode::text_to_image;
  throw ValidationError("unknown retrieval mode '" + std::string(text) + "'");
}

std::vector<RetrievalHit> retrieve_topk(const EmbeddingRecord& query, const Corpus& corpus, std::size_t k,
                                        RetrievalMode mode, std::string_view exclude_id) {
  if (k == 0) throw ValidationError("retrieve_topk: k must be at least 1");
  const std::vector<double> q = mean_pool(query.token_embeddings);
  if (mode == RetrievalMode::text_to_text) {
    if (q.size() != corpus.dims().token_dim)
      throw ShapeError("retrieve_topk: query dimension " + std::to_string(q.size()) + " does not match corpus " +
                       std::to_string(corpus.dims().token_dim));
  } else if (!corpus.dims().image_dim || *corpus.dims().image_dim != q.size()) {
    throw ShapeError("retrieve_topk: text-to-image mode needs image embeddings of dimension " +
                     std::to_string(q.size()));
  }

  std::vector<RetrievalHit> hits;
  hits.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& rec = corpus.at(i);
    if (!exclude_id.empty() && rec.id == exclude_id) continue;
    if (mode == RetrievalMode::text_to_text) {
      hits.push_back({rec.id, cosine_similarity(q, corpus.pooled(i))});
    } else {
      if (!rec.image_embedding) throw ValidationError("record '" + rec.id + "' has no image_embedding");
      hits.push_back({rec.id, cosine_similarity(q, *rec.image_embedding)});
    }
  }
  const std::size_t keep = std::min(k, hits.size());
  auto better = [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  };
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);
  hits.resize(keep);
  return hits;
}

Json ScoreReport::to_json() const {
  Json entries_json = Json::array();
  for (const auto& e : entries) entries_json.push_back(Json{{"id", e.id}, {"score", e.score}});
  return Json{{"score", score}, {"count", entries.size()}, {"entries", entries_json}};
}

std::vector<std::string> select_queries(const Corpus& corpus, std::size_t count, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& r : corpus.records()) ids.push_back(r.id);
  if (count >= ids.size()) return ids;
  num::Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(ids.size() - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(count);
  return ids;
}

ScoreReport discriminability_score(const Corpus& corpus, const std::vector<std::string>& query_ids, std::size_t k,
                                   RetrievalMode mode) {
  if (query_ids.empty()) throw ValidationError("discriminability_score: no queries");
  std::vector<std::string> missing;
  auto note_missing = [&missing](const EmbeddingRecord& r) {
    if (!r.vision_embedding && std::find(missing.begin(), missing.end(), r.id) == missing.end())
      missing.push_back(r.id);
  };
  ScoreReport report;
  for (const auto& qid : query_ids) {
    const auto& query = corpus.by_id(qid);
    note_missing(query);
    const auto hits = retrieve_topk(query, corpus, k, mode, qid);
    if (hits.empty()) throw ValidationError("discriminability_score: corpus has no records besides the query");
    double acc = 0.0;
    for (const auto& h : hits) {
      const auto& rec = corpus.by_id(h.id);
      note_missing(rec);
      if (query.vision_embedding && rec.vision_embedding)
        acc += cosine_similarity(*rec.vision_embedding, *query.vision_embedding);
    }
    report.entries.push_back({qid, acc / static_cast<double>(hits.size())});
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw ValidationError("discriminability_score: missing vision_embedding for records: " + list);
  }
  double total = 0.0;
  for (const auto& e : report.entries) total += e.score;
  report.score = total / static_cast<double>(report.entries.size());
  return report;
}

EmbeddingRecord ablate_tokens(const EmbeddingRecord& record, double rho, num::Rng& rng) {
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("ablate_tokens: rho must lie in (0, 1)");
  const std::size_t l = record.token_embeddings.rows();
  if (l < 2) throw ValidationError("ablate_tokens: record '" + record.id + "' has a single token, nothing to remove");
  const auto n_remove =
      std::min<std::size_t>(static_cast<std::size_t>(std::lround(rho * static_cast<double>(l))), l - 1);
  std::vector<std::size_t> order(l);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < n_remove; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(l - i));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> removed(l, false);
  for (std::size_t i = 0; i < n_remove; ++i) removed[order[i]] = true;

  std::vector<std::vector<double>> kept;
  for (std::size_t i = 0; i < l; ++i) {
    if (removed[i]) continue;
    auto row = record.token_embeddings.row_span(i);
    kept.emplace_back(row.begin(), row.end());
  }
  EmbeddingRecord out = record;
  out.token_embeddings = num::stack_rows(kept);
  return out;
}

namespace {

Tensor sorted_rows(const Tensor& tokens) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < tokens.rows(); ++i) {
    auto row = tokens.row_span(i);
    rows.emplace_back(row.begin(), row.end());
  }
  std::stable_sort(rows.begin(), rows.end());
  return num::stack_rows(rows);
}

}  // namespace

ScoreReport disentanglement_score(const Corpus& corpus, double rho, std::uint64_t seed) {
  if (corpus.size() == 0) throw ValidationError("disentanglement_score: empty corpus");
  const num::Rng base(seed);
  ScoreReport report;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EmbeddingRecord canonical = corpus.at(i);
    canonical.token_embeddings = sorted_rows(canonical.token_embeddings);
    num::Rng rng = base.split(num::stable_hash(canonical.id));
    const EmbeddingRecord ablated = ablate_tokens(canonical, rho, rng);
    report.entries.push_back(
        {canonical.id, cosine_similarity(corpus.pooled(i), mean_pool(ablated.token_embeddings))});
  }
  double total = 0.0;
  for (const auto& e : report.entries) total += e.score;
  report.score = total / static_cast<double>(report.entries.size());
  return report;
}

}  // namespace mflab::enc
