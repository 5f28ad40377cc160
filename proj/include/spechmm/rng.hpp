#ifndef SPECHMM_RNG_HPP
#define SPECHMM_RNG_HPP

#include "spechmm/types.hpp"

#include <cstdint>
#include <random>

namespace spechmm {

// splitmix64 mixing step; used to derive independent stream seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

// Seeded generator with explicit variate recipes so that sequences are
// reproducible independently of the standard library's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform();

  // Standard normal via the Marsaglia polar method.
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);

  // Beta(alpha, beta) from a pair of gamma draws.
  double beta(double alpha, double beta);

  // Index in [0, weights.size()) with the given probabilities.
  int categorical(const Vec& weights);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace spechmm

#endif  // SPECHMM_RNG_HPP
