#pragma once

#include <cstdint>

#include "mflab/num/rng.hpp"

namespace mflab::harness {

// Named random streams of an experiment. Every consumer derives its generator
// from (seed, stream) so adding a consumer never shifts another's draws.
enum class Stream : std::uint64_t {
  embeddings = 1,
  fm_init = 2,
  mf_init = 3,
  fm_train = 4,
  mf_train = 5,
  eval_noise = 6,
  eval_reference = 7,
  dataset = 8,
  sampling = 9,
  corpus = 10,
};

inline num::Rng stream_rng(std::uint64_t seed, Stream s) { return num::Rng(seed).split(static_cast<std::uint64_t>(s)); }
inline std::uint64_t stream_seed(std::uint64_t seed, Stream s) { return stream_rng(seed, s).next_u64(); }

}  // namespace mflab::harness
