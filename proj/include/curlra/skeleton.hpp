#pragma once

#include <iosfwd>
#include <optional>
#include <variant>

#include "curlra/entry_source.hpp"
#include "curlra/linalg.hpp"
#include "curlra/random.hpp"

namespace curlra {

// W ~ W[:, J] * U * W[I, :], U is l x k.
template <Scalar T>
struct CurLra {
  IndexSet I, J;
  Matrix<T> U;
  std::size_t r = 0;
  std::size_t m = 0, n = 0;

  std::size_t k() const { return I.size(); }
  std::size_t l() const { return J.size(); }
  void validate() const;
  bool operator==(const CurLra&) const = default;
};

// Relative tolerance under which an r x r generator counts as singular.
inline constexpr double kSingularGeneratorTol = 1e-13;

// Pseudo-inverse of the rank-r truncation of the generator; the exact inverse
// when k = l = r (SingularGenerator if that block is singular).
template <Scalar T>
Matrix<T> canonical_nucleus(const Matrix<T>& Wkl, std::size_t r);

template <Scalar T>
CurLra<T> make_cur(const IndexSet& I, const IndexSet& J, const Matrix<T>& Wkl, std::size_t r, std::size_t m,
                   std::size_t n);

// Dense C U R.
template <Scalar T>
Matrix<T> reconstruct(const CurLra<T>& cur, const Matrix<T>& W);
// C (U (R x)) without forming the product.
template <Scalar T>
std::vector<T> apply(const CurLra<T>& cur, const Matrix<T>& W, const std::vector<T>& x);

struct ErrorReport {
  NormKind kind = NormKind::spectral;
  double absolute = 0;
  double relative = 0;
  std::optional<double> sigma_tail;
};

// Full evaluation of W - CUR (the dense audit path; not sublinear).
template <Scalar T>
ErrorReport dense_error(const Matrix<T>& W, const CurLra<T>& cur, NormKind kind, bool with_tail = false);

struct AprioriInputs {
  double normC = 0, normR = 0, normU = 0;  // in the selected norm
  double normU_spectral = 0;               // enters theta
  double sigma_tail = 0;                   // sigma~_{r+1} of W in the selected norm
  std::size_t k = 0, l = 0, r = 0;
  NormKind kind = NormKind::spectral;
};

struct AprioriBound {
  bool available = false;  // false when theta >= 1
  double value = 0;
  double theta = 0, mu = 0, eta = 0, xi = 0;
};

AprioriBound apriori_error_bound(const AprioriInputs& in);
template <Scalar T>
AprioriBound apriori_error_bound(const CurLra<T>& cur, const Matrix<T>& W, double sigma_tail, NormKind kind);

struct PosteriorReport {
  std::size_t samples = 0;
  cplx mean = 0;           // plain mean of the sampled error entries
  double variance = 0;     // (1/K) sum |g - mean|^2
  double frobenius_estimate = 0;
  // Chi-square test of variance <= null_variance; empty without a null.
  std::optional<bool> within_tolerance;
  double statistic = 0, threshold = 0;
};

// Samples a uniform q x s grid and evaluates W - CUR only there.
template <Scalar T>
PosteriorReport posterior_error_sampled(EntrySource<T>& W, const CurLra<T>& cur, std::size_t q, std::size_t s,
                                        Rng& rng, double null_variance = 0, double alpha = 0.01);
template <Scalar T>
PosteriorReport posterior_error_sampled(const Matrix<T>& W, const CurLra<T>& cur, std::size_t q, std::size_t s,
                                        Rng& rng, double null_variance = 0, double alpha = 0.01) {
  EntrySource<T> src(W);
  return posterior_error_sampled(src, cur, q, s, rng, null_variance, alpha);
}

// U = C^+ W R^+ (reads all of W).
template <Scalar T>
Matrix<T> nucleus_md09(const Matrix<T>& W, const Matrix<T>& C, const Matrix<T>& R);

using AnyCur = std::variant<CurLra<double>, CurLra<cplx>>;

template <Scalar T>
void write_cur(std::ostream& out, const CurLra<T>& cur);
AnyCur read_cur(std::istream& in);

}  // namespace curlra
