#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mflab/enc/analysis.hpp"
#include "mflab/enc/corpus.hpp"
#include "mflab/enc/synthetic.hpp"
#include "mflab/errors.hpp"

namespace mflab::enc {
namespace {

EmbeddingRecord rec(std::string id, Tensor tokens, std::optional<std::vector<double>> vision = std::nullopt,
                    std::optional<std::vector<double>> image = std::nullopt) {
  EmbeddingRecord r;
  r.id = std::move(id);
  r.token_embeddings = std::move(tokens);
  r.vision_embedding = std::move(vision);
  r.image_embedding = std::move(image);
  return r;
}

TEST(MeanPool, HandValues) {
  const auto p = mean_pool(Tensor::matrix({{1, 2}, {3, 4}, {5, 9}}));
  EXPECT_NEAR(p[0], 3.0, 1e-12);
  EXPECT_NEAR(p[1], 5.0, 1e-12);
}

TEST(CosineDistance, HandValues) {
  const std::vector<double> e1{1, 0}, e2{0, 1}, m1{-1, 0}, a{1, 2}, b{2, 4}, c{3, 4};
  EXPECT_NEAR(cosine_distance(e1, e2), 1.0, 1e-12);
  EXPECT_NEAR(cosine_distance(e1, m1), 2.0, 1e-12);
  EXPECT_NEAR(cosine_distance(a, b), 0.0, 1e-12);
  EXPECT_NEAR(cosine_distance(e1, c), 1.0 - 0.6, 1e-12);
  const std::vector<double> zero{0, 0};
  EXPECT_THROW(cosine_distance(zero, e1), ValidationError);
  EXPECT_THROW(cosine_distance(e1, std::vector<double>{1, 2, 3}), ShapeError);
}

Corpus three_record_fixture() {
  return Corpus({rec("a", Tensor::matrix({{1.0, 0.0}}), std::vector<double>{1, 0}),
                 rec("b", Tensor::matrix({{0.9, 0.1}}), std::vector<double>{0, 1}),
                 rec("c", Tensor::matrix({{0.0, 1.0}}), std::vector<double>{1, 1})});
}

TEST(Retrieval, HandRanking) {
  const Corpus corpus = three_record_fixture();
  const auto hits = retrieve_topk(corpus.by_id("c"), corpus, 2);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].id, "c");
  EXPECT_NEAR(hits[0].similarity, 1.0, 1e-12);
  EXPECT_EQ(hits[1].id, "b");
  EXPECT_NEAR(hits[1].similarity, 0.1 / std::sqrt(0.82), 1e-12);
  const auto excl = retrieve_topk(corpus.by_id("a"), corpus, 5, RetrievalMode::text_to_text, "a");
  ASSERT_EQ(excl.size(), 2u);
  EXPECT_EQ(excl[0].id, "b");
  EXPECT_EQ(excl[1].id, "c");
  EXPECT_THROW(retrieve_topk(corpus.by_id("a"), corpus, 0), ValidationError);
}

TEST(Retrieval, TiesBreakByAscendingId) {
  const Corpus corpus({rec("z", Tensor::matrix({{1.0, 0.0}})), rec("m", Tensor::matrix({{2.0, 0.0}})),
                       rec("q", Tensor::matrix({{0.0, 1.0}}))});
  const auto hits = retrieve_topk(rec("query", Tensor::matrix({{5.0, 0.0}})), corpus, 2);
  EXPECT_EQ(hits[0].id, "m");
  EXPECT_EQ(hits[1].id, "z");
}

TEST(Retrieval, TextToImageUsesImageEmbeddings) {
  const Corpus corpus({rec("x", Tensor::matrix({{1.0, 0.0}}), std::nullopt, std::vector<double>{0, 1}),
                       rec("y", Tensor::matrix({{0.0, 1.0}}), std::nullopt, std::vector<double>{1, 0})});
  const auto hits = retrieve_topk(rec("q", Tensor::matrix({{1.0, 0.0}})), corpus, 1, RetrievalMode::text_to_image);
  EXPECT_EQ(hits[0].id, "y");
}

TEST(Retrieval, MatchesBruteForceOnLargeCorpus) {
  num::Rng rng(17);
  std::vector<EmbeddingRecord> records;
  for (int i = 0; i < 1000; ++i)
    records.push_back(rec("r" + std::to_string(i), rng.normal_tensor({3, 6}), std::nullopt,
                          std::vector<double>(6, 0.0)));
  for (auto& r : records)
    for (double& v : *r.image_embedding) v = rng.normal();
  const Corpus corpus(records);
  for (int trial = 0; trial < 20; ++trial) {
    const EmbeddingRecord query = rec("q", rng.normal_tensor({4, 6}));
    for (RetrievalMode mode : {RetrievalMode::text_to_text, RetrievalMode::text_to_image}) {
      const auto q = mean_pool(query.token_embeddings);
      std::vector<std::pair<double, std::string>> all;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& target = mode == RetrievalMode::text_to_text ? mean_pool(corpus.at(i).token_embeddings)
                                                                 : *corpus.at(i).image_embedding;
        double dot = 0, nq = 0, nt = 0;
        for (std::size_t j = 0; j < 6; ++j) {
          dot += q[j] * target[j];
          nq += q[j] * q[j];
          nt += target[j] * target[j];
        }
        all.emplace_back(-dot / std::sqrt(nq * nt), corpus.at(i).id);
      }
      std::sort(all.begin(), all.end());
      const auto hits = retrieve_topk(query, corpus, 10, mode);
      ASSERT_EQ(hits.size(), 10u);
      for (std::size_t k = 0; k < 10; ++k) {
        EXPECT_EQ(hits[k].id, all[k].second);
        EXPECT_NEAR(hits[k].similarity, -all[k].first, 1e-12);
      }
    }
  }
}

TEST(Discriminability, HandFixture) {
  const Corpus corpus = three_record_fixture();
  const std::vector<std::string> all{"a", "b", "c"};
  // k = 1: a -> b (vision cos 0), b -> a (0), c -> b (1/sqrt 2).
  const ScoreReport k1 = discriminability_score(corpus, all, 1);
  EXPECT_NEAR(k1.score, (1.0 / std::sqrt(2.0)) / 3.0, 1e-12);
  ASSERT_EQ(k1.entries.size(), 3u);
  EXPECT_NEAR(k1.entries[2].score, 1.0 / std::sqrt(2.0), 1e-12);
  // k = 2 retrieves both other records for every query.
  const ScoreReport k2 = discriminability_score(corpus, all, 2);
  EXPECT_NEAR(k2.score, std::sqrt(2.0) / 3.0, 1e-12);
}

TEST(Discriminability, MissingVisionEmbeddingsAreListed) {
  const Corpus corpus({rec("a", Tensor::matrix({{1.0, 0.0}}), std::vector<double>{1, 0}),
                       rec("b", Tensor::matrix({{1.0, 0.1}}))});
  try {
    discriminability_score(corpus, {"a"}, 1);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
}

TEST(Disentanglement, HandFixture) {
  // Two tokens, rho = 0.5: exactly one token is removed.
  const Corpus corpus({rec("sym", Tensor::matrix({{1.0, 0.0}, {0.0, 1.0}})),
                       rec("same", Tensor::matrix({{2.0, 3.0}, {2.0, 3.0}})),
                       rec("skew", Tensor::matrix({{3.0, 0.0}, {0.0, 4.0}}))});
  const ScoreReport r = disentanglement_score(corpus, 0.5, 99);
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_NEAR(r.entries[0].score, 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.entries[1].score, 1.0, 1e-12);
  // Sorted rows are [(0, 4), (3, 0)]; the pooled vector (1.5, 2) keeps cosine
  // 0.8 with (0, 4) and 0.6 with (3, 0).
  num::Rng rng = num::Rng(99).split(num::stable_hash("skew"));
  const bool first_removed = rng.below(2) == 0;
  EXPECT_NEAR(r.entries[2].score, first_removed ? 0.6 : 0.8, 1e-12);
  EXPECT_NEAR(r.score, (r.entries[0].score + r.entries[1].score + r.entries[2].score) / 3.0, 1e-12);
}

TEST(Disentanglement, IdenticalTokensScoreOne) {
  num::Rng rng(5);
  std::vector<EmbeddingRecord> records;
  for (int i = 0; i < 20; ++i) {
    const Tensor one = rng.normal_tensor({1, 8});
    records.push_back(rec("r" + std::to_string(i), num::repeat_row(one, 2 + i % 5)));
  }
  for (double rho : {0.25, 0.5, 0.75}) EXPECT_NEAR(disentanglement_score(Corpus(records), rho, 3).score, 1.0, 1e-12);
}

TEST(Disentanglement, InvariantToRecordAndTokenOrder) {
  num::Rng rng(6);
  std::vector<EmbeddingRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back(rec("r" + std::to_string(i), rng.normal_tensor({6, 4})));
  const double base = disentanglement_score(Corpus(records), 0.5, 8).score;
  std::reverse(records.begin(), records.end());
  for (auto& r : records) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = r.token_embeddings.rows(); i-- > 0;) {
      auto row = r.token_embeddings.row_span(i);
      rows.emplace_back(row.begin(), row.end());
    }
    r.token_embeddings = num::stack_rows(rows);
  }
  EXPECT_DOUBLE_EQ(disentanglement_score(Corpus(records), 0.5, 8).score, base);
}

TEST(Ablation, RemovesRoundedFractionAndKeepsOne) {
  num::Rng rng(7);
  const EmbeddingRecord r = rec("x", rng.normal_tensor({10, 3}));
  EXPECT_EQ(ablate_tokens(r, 0.3, rng).token_embeddings.rows(), 7u);
  EXPECT_EQ(ablate_tokens(r, 0.99, rng).token_embeddings.rows(), 1u);
  EXPECT_THROW(ablate_tokens(r, 0.0, rng), ValidationError);
  EXPECT_THROW(ablate_tokens(rec("y", rng.normal_tensor({1, 3})), 0.5, rng), ValidationError);
}

TEST(Corpus, RejectsDuplicatesAndMixedDims) {
  EXPECT_THROW(Corpus({rec("a", Tensor::matrix({{1.0}})), rec("a", Tensor::matrix({{2.0}}))}), ValidationError);
  EXPECT_THROW(Corpus({rec("a", Tensor::matrix({{1.0}})), rec("b", Tensor::matrix({{2.0, 1.0}}))}),
               ValidationError);
  EXPECT_THROW(three_record_fixture().by_id("nope"), ValidationError);
}

TEST(Corpus, JsonlRoundTripIsExact) {
  num::Rng rng(8);
  std::vector<EmbeddingRecord> records;
  for (int i = 0; i < 5; ++i) {
    auto r = rec("r" + std::to_string(i), rng.normal_tensor({3, 4}), std::vector<double>{rng.normal(), rng.normal()});
    r.text = "prompt " + std::to_string(i);
    records.push_back(r);
  }
  const Corpus corpus(records);
  const std::string text = corpus_to_jsonl(corpus);
  const Corpus back = parse_corpus_jsonl(text);
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(back.at(i).token_embeddings, corpus.at(i).token_embeddings);
    EXPECT_EQ(back.at(i).vision_embedding, corpus.at(i).vision_embedding);
    EXPECT_EQ(back.at(i).text, corpus.at(i).text);
  }
  EXPECT_EQ(corpus_to_jsonl(back), text);
  EXPECT_THROW(parse_corpus_jsonl("{\"id\": \"x\"}\n"), ValidationError);
}

TEST(SyntheticEmbeddings, PooledTokensReproducePsi) {
  for (EmbedMode mode : {EmbedMode::disentangled, EmbedMode::entangled}) {
    SyntheticEmbedSpec spec;
    spec.values_per_attribute = 3;
    spec.mode = mode;
    const ConditionTable table = gen_synthetic_embeddings(spec, 11);
    ASSERT_EQ(table.entries.size(), 9u);
    for (const auto& e : table.entries) {
      const auto pooled = mean_pool(e.tokens);
      for (std::size_t j = 0; j < pooled.size(); ++j) EXPECT_NEAR(pooled[j], e.psi[j], 1e-12);
    }
    const ConditionTable back = ConditionTable::from_json(table.to_json());
    EXPECT_EQ(back.at("c2_1").psi, table.at("c2_1").psi);
  }
}

TEST(SyntheticEmbeddings, DisentangledIsCompositional) {
  SyntheticEmbedSpec spec;
  spec.values_per_attribute = 3;
  const ConditionTable t = gen_synthetic_embeddings(spec, 1);
  // psi(a, b) - psi(a', b) does not depend on b.
  for (int b = 0; b < 3; ++b) {
    const auto& p0 = t.at("c0_" + std::to_string(b)).psi;
    const auto& p1 = t.at("c1_" + std::to_string(b)).psi;
    const auto& q0 = t.at("c0_0").psi;
    const auto& q1 = t.at("c1_0").psi;
    for (std::size_t j = 0; j < p0.size(); ++j) EXPECT_DOUBLE_EQ(p1[j] - p0[j], q1[j] - q0[j]);
  }
}

}  // namespace
}  // namespace mflab::enc
