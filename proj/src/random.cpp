#include "curlra/random.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <unordered_set>

namespace curlra {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), eng_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

Rng Rng::split(std::uint64_t child) const {
  return Rng(splitmix64(seed_ ^ (stream_ * 0xd1b54a32d192ed03ULL)), child);
}

cplx Rng::unit_circle() {
  const double t = 2 * std::numbers::pi * uniform();
  return {std::cos(t), std::sin(t)};
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw ArgumentError("sample_without_replacement: k > n");
  // Floyd's algorithm: k draws.
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  std::unordered_set<std::size_t> seen;
  seen.reserve(2 * k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(eng_);
    const std::size_t pick = seen.count(t) ? j : t;
    seen.insert(pick);
    chosen.push_back(pick);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), eng_);
  return p;
}

}  // namespace curlra
