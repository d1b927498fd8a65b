#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curlra/io.hpp"
#include "curlra/matrix.hpp"
#include "curlra/random.hpp"

namespace curlra {

Mat gen_gaussian(std::size_t m, std::size_t n, Rng& rng);

// Exactly nz Gaussian entries, no zero row or column.
Mat gen_nz_gaussian(std::size_t m, std::size_t n, std::size_t nz, Rng& rng);

enum class FactorKind { scaled, diagonally_scaled, left, right };

struct FactorGaussianSpec {
  std::size_t m = 0, n = 0, r = 0;
  FactorKind kind = FactorKind::scaled;
  double sigma = 1.0;       // scale (scaled) or leading value (diagonally scaled)
  double rho = 0.5;         // geometric decay of the diagonal
  double max_ratio = 1e3;   // cap on sigma_1 / sigma_r
  double eps = 0.0;         // Gaussian perturbation size
  std::optional<Mat> fixed; // H (r x n) for left, G (m x r) for right kinds
};

struct FactorGaussian {
  Mat W, G, H;
  std::vector<double> Sigma;
};

// W = G diag(Sigma) H + eps E.
FactorGaussian gen_factor_gaussian(const FactorGaussianSpec& spec, Rng& rng);

// Diagonal used by the diagonally scaled kind.
std::vector<double> geometric_spectrum(std::size_t r, double sigma1, double rho, double max_ratio);

Mat gen_plus_minus_delta(std::size_t m, std::size_t n, std::size_t i, std::size_t j, int sign);

// Discretized single-layer potential between the circles of radii 1 and 2,
// scaled to unit spectral norm.
Mat gen_laplacian(std::size_t n, double quad_tol = 1e-10);

// Unscaled entry (i, j) of the Laplacian matrix.
double laplacian_entry(std::size_t n, std::size_t i, std::size_t j, double quad_tol = 1e-10);

// Adaptive Gauss-Legendre quadrature on [a, b] with absolute tolerance.
template <class F>
double integrate(F&& f, double a, double b, double tol, int max_depth = 40);

// Flat description used by config files.
struct GeneratorSpec {
  std::string variant = "factor_gaussian";  // gaussian | nz_gaussian | factor_gaussian | plus_minus_delta | laplacian | from_file
  std::size_t m = 256, n = 256, r = 8, nz = 0;
  FactorKind kind = FactorKind::scaled;
  double sigma = 1.0, rho = 0.5, max_ratio = 1e3, eps = 1e-10;
  std::size_t i = 0, j = 0;
  int sign = 1;
  std::string path;
};

AnyMatrix generate(const GeneratorSpec& spec, Rng& rng);

FactorKind parse_factor_kind(const std::string& s);
std::string to_string(FactorKind k);

}  // namespace curlra

#include "curlra/detail/quadrature.hpp"
