#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "curlra/matrix.hpp"

namespace curlra {

// Seeded generator; (seed, stream) pairs give independent reproducible streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  // Child stream, independent of this one's state.
  Rng split(std::uint64_t child) const;

  double normal() { return normal_(eng_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }
  double sign() { return (eng_() >> 63) ? 1.0 : -1.0; }
  cplx unit_circle();

  // k distinct indices from [0, n), sorted.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);
  std::vector<std::size_t> permutation(std::size_t n);

  std::mt19937_64& engine() { return eng_; }

 private:
  std::uint64_t seed_, stream_;
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace curlra
