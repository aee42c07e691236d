#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mflab/conditions.hpp"
#include "mflab/enc/corpus.hpp"
#include "mflab/json_io.hpp"

namespace mflab::enc {

enum class EmbedMode { disentangled, entangled };
std::string_view to_string(EmbedMode mode);
EmbedMode parse_embed_mode(std::string_view text);

/// Controllable stand-in for a text encoder over attribute-tuple prompts.
struct SyntheticEmbedSpec {
  std::size_t n_attributes = 2;
  std::size_t values_per_attribute = 2;
  std::size_t dim = 8;
  double separation = 4.0;
  EmbedMode mode = EmbedMode::disentangled;
  std::size_t tokens_per_attribute = 4;

  void validate() const;
};

struct ConditionEmbedding {
  ConditionTuple tuple;
  std::string id;
  std::vector<double> psi;  // pooled condition embedding
  Tensor tokens;            // n_attributes * tokens_per_attribute rows; mean_pool(tokens) == psi
};

struct ConditionTable {
  SyntheticEmbedSpec spec;
  std::uint64_t seed = 0;
  std::vector<ConditionEmbedding> entries;  // enumerate_conditions order

  const ConditionEmbedding& at(const std::string& id) const;
  // psi of `id` as a 1 x dim row.
  Tensor psi_row(const std::string& id) const;
  Json to_json() const;
  static ConditionTable from_json(const Json& j);
};

/// disentangled: psi = separation * concat(one-hot value code per attribute
///   block); each attribute contributes tokens_per_attribute identical tokens
///   carrying only its own block, so mean pooling reproduces psi.
/// entangled: every token of every tuple is an independent Gaussian vector and
///   psi is their mean; the whole table is rescaled so the mean pairwise psi
///   distance equals the disentangled layout's.
ConditionTable gen_synthetic_embeddings(const SyntheticEmbedSpec& spec, std::uint64_t seed);

struct SyntheticCorpusSpec {
  std::size_t records_per_condition = 8;
  double token_noise = 1.0;   // per-entry Gaussian noise added to each prompt's tokens
  std::size_t vision_dim = 16;
  double vision_noise = 0.3;  // noise around a per-condition unit vision prototype
};

/// Prompt-level corpus built from a condition table: every record is a noisy
/// paraphrase of one condition, paired with a vision embedding near that
/// condition's prototype and an image embedding in the text space.
Corpus synthetic_corpus(const ConditionTable& table, const SyntheticCorpusSpec& spec, std::uint64_t seed);

}  // namespace mflab::enc
