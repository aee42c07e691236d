#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "mflab/num/tensor.hpp"

namespace mflab::num {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
// Stable 64-bit FNV-1a hash of a string, used to derive per-record streams.
std::uint64_t stable_hash(std::string_view s) noexcept;

/// Seeded generator with explicit stream splitting. Uniform and normal draws
/// are computed here rather than through <random> distributions so that a
/// seed reproduces the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  // Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL))); }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1).
  double uniform_open() {
    double u;
    do u = uniform();
    while (u == 0.0);
    return u;
  }
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Tensor normal_tensor(Shape shape);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mflab::num
