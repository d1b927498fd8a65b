#include "curlra/generators.hpp"

#include <cmath>
#include <numbers>

#include "curlra/linalg.hpp"

namespace curlra {

Mat gen_gaussian(std::size_t m, std::size_t n, Rng& rng) {
  if (m == 0 || n == 0) throw ArgumentError("gen_gaussian: dimensions must be positive");
  Mat A(m, n);
  for (std::size_t t = 0; t < A.size(); ++t) A.data()[t] = rng.normal();
  return A;
}

Mat gen_nz_gaussian(std::size_t m, std::size_t n, std::size_t nz, Rng& rng) {
  if (nz < std::max(m, n)) throw ArgumentError("gen_nz_gaussian: NZ must be at least max(m, n)");
  if (nz > m * n) throw ArgumentError("gen_nz_gaussian: NZ exceeds m*n");
  std::vector<std::size_t> pos;
  bool ok = false;
  for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
    pos = rng.sample_without_replacement(m * n, nz);
    std::vector<char> row(m, 0), col(n, 0);
    for (auto p : pos) row[p / n] = col[p % n] = 1;
    ok = std::find(row.begin(), row.end(), 0) == row.end() && std::find(col.begin(), col.end(), 0) == col.end();
  }
  if (!ok) {
    // Deterministic repair: a wrapped diagonal covers every row and column,
    // the rest of the budget is spread uniformly over the other positions.
    const std::size_t base = std::max(m, n);
    std::vector<char> used(m * n, 0);
    pos.clear();
    for (std::size_t t = 0; t < base; ++t) {
      const std::size_t p = (t % m) * n + (t % n);
      if (!used[p]) {
        used[p] = 1;
        pos.push_back(p);
      }
    }
    std::vector<std::size_t> rest;
    for (std::size_t p = 0; p < m * n; ++p)
      if (!used[p]) rest.push_back(p);
    for (auto t : rng.sample_without_replacement(rest.size(), nz - pos.size())) pos.push_back(rest[t]);
  }
  Mat A(m, n);
  for (auto p : pos) A.data()[p] = rng.normal();
  return A;
}

std::vector<double> geometric_spectrum(std::size_t r, double sigma1, double rho, double max_ratio) {
  if (!(rho > 0 && rho <= 1)) throw ArgumentError("geometric_spectrum: rho must lie in (0, 1]");
  if (r > 1 && std::pow(rho, double(r - 1)) < 1.0 / max_ratio) rho = std::pow(max_ratio, -1.0 / double(r - 1));
  std::vector<double> s(r);
  for (std::size_t i = 0; i < r; ++i) s[i] = sigma1 * std::pow(rho, double(i));
  return s;
}

namespace {

Mat orthonormal_rows(std::size_t r, std::size_t n, Rng& rng) {
  return orthonormal_columns(gen_gaussian(n, r, rng)).transpose();
}

}  // namespace

FactorGaussian gen_factor_gaussian(const FactorGaussianSpec& s, Rng& rng) {
  if (s.r == 0 || s.r > std::min(s.m, s.n)) throw ArgumentError("gen_factor_gaussian: need 0 < r <= min(m, n)");
  FactorGaussian out;
  switch (s.kind) {
    case FactorKind::scaled:
      out.G = gen_gaussian(s.m, s.r, rng);
      out.H = gen_gaussian(s.r, s.n, rng);
      out.Sigma.assign(s.r, s.sigma);
      break;
    case FactorKind::diagonally_scaled:
      out.G = gen_gaussian(s.m, s.r, rng);
      out.H = gen_gaussian(s.r, s.n, rng);
      out.Sigma = geometric_spectrum(s.r, s.sigma, s.rho, s.max_ratio);
      break;
    case FactorKind::left:
      out.G = gen_gaussian(s.m, s.r, rng);
      out.H = s.fixed ? *s.fixed : orthonormal_rows(s.r, s.n, rng);
      if (out.H.rows() != s.r || out.H.cols() != s.n) throw ArgumentError("gen_factor_gaussian: fixed H must be r x n");
      out.Sigma.assign(s.r, s.sigma);
      break;
    case FactorKind::right:
      out.G = s.fixed ? *s.fixed : orthonormal_rows(s.r, s.m, rng).transpose();
      if (out.G.rows() != s.m || out.G.cols() != s.r) throw ArgumentError("gen_factor_gaussian: fixed G must be m x r");
      out.H = gen_gaussian(s.r, s.n, rng);
      out.Sigma.assign(s.r, s.sigma);
      break;
  }
  Mat GS = out.G;
  for (std::size_t i = 0; i < s.m; ++i)
    for (std::size_t j = 0; j < s.r; ++j) GS(i, j) *= out.Sigma[j];
  out.W = matmul(GS, out.H);
  if (s.eps != 0) out.W += s.eps * gen_gaussian(s.m, s.n, rng);
  return out;
}

Mat gen_plus_minus_delta(std::size_t m, std::size_t n, std::size_t i, std::size_t j, int sign) {
  if (i >= m || j >= n) throw ArgumentError("gen_plus_minus_delta: position out of range");
  Mat A(m, n);
  A(i, j) = sign < 0 ? -1.0 : 1.0;
  return A;
}

double laplacian_entry(std::size_t n, std::size_t i, std::size_t j, double quad_tol) {
  const double h = 2 * std::numbers::pi / double(n);
  const double alpha = h * double(i);
  // log|2 e^{i alpha} - e^{i theta}| over the arc [j h, (j + 1) h], arc length measure.
  auto f = [alpha](double theta) { return 0.5 * std::log(5.0 - 4.0 * std::cos(theta - alpha)); };
  return integrate(f, h * double(j), h * double(j + 1), quad_tol);
}

Mat gen_laplacian(std::size_t n, double quad_tol) {
  if (n < 4) throw ArgumentError("gen_laplacian: n must be at least 4");
  Mat W(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) W(i, j) = laplacian_entry(n, i, j, quad_tol);
  W *= 1.0 / norm(W, NormKind::spectral);
  return W;
}

FactorKind parse_factor_kind(const std::string& s) {
  if (s == "scaled") return FactorKind::scaled;
  if (s == "diagonally_scaled") return FactorKind::diagonally_scaled;
  if (s == "left") return FactorKind::left;
  if (s == "right") return FactorKind::right;
  throw ArgumentError("unknown factor kind '" + s + "'");
}

std::string to_string(FactorKind k) {
  switch (k) {
    case FactorKind::scaled:
      return "scaled";
    case FactorKind::diagonally_scaled:
      return "diagonally_scaled";
    case FactorKind::left:
      return "left";
    case FactorKind::right:
      return "right";
  }
  return "scaled";
}

AnyMatrix generate(const GeneratorSpec& g, Rng& rng) {
  if (g.variant == "gaussian") return gen_gaussian(g.m, g.n, rng);
  if (g.variant == "nz_gaussian") return gen_nz_gaussian(g.m, g.n, g.nz, rng);
  if (g.variant == "factor_gaussian") {
    FactorGaussianSpec s;
    s.m = g.m;
    s.n = g.n;
    s.r = g.r;
    s.kind = g.kind;
    s.sigma = g.sigma;
    s.rho = g.rho;
    s.max_ratio = g.max_ratio;
    s.eps = g.eps;
    return gen_factor_gaussian(s, rng).W;
  }
  if (g.variant == "plus_minus_delta") return gen_plus_minus_delta(g.m, g.n, g.i, g.j, g.sign);
  if (g.variant == "laplacian") return gen_laplacian(g.n);
  if (g.variant == "from_file") return load_matrix(g.path);
  throw ArgumentError("unknown generator variant '" + g.variant + "'");
}

}  // namespace curlra
