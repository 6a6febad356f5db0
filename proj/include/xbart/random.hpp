#pragma once

#include <cstdint>
#include <random>

namespace xbart {

// Every sampler in the library draws from this engine so that a seed fixes
// the complete output of a fit.
using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent per-replicate seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double draw_uniform(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double draw_normal(Rng& rng, double mean, double sd) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

// Inverse-Gamma(shape, rate): reciprocal of a Gamma(shape, scale = 1 / rate).
inline double draw_inverse_gamma(Rng& rng, double shape, double rate) {
  return 1.0 / std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

}  // namespace xbart
