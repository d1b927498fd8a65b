#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curlra {

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by the exact-inverse nucleus when k = l = r and the generator is singular.
struct SingularGenerator : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

struct RankMismatch : std::runtime_error {
  RankMismatch(const std::string& what, std::size_t expected, std::size_t found)
      : std::runtime_error(what), expected(expected), found(found) {}
  std::size_t expected;
  std::size_t found;
};

// Random selection kept producing rank-deficient generators.
struct UnluckySampling : NumericalFailure {
  UnluckySampling(const std::string& what, int attempts, double last_sigma_r)
      : NumericalFailure(what), attempts(attempts), last_sigma_r(last_sigma_r) {}
  int attempts;
  double last_sigma_r;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  std::size_t line;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace curlra
