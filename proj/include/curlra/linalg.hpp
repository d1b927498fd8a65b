#pragma once

#include <cstddef>
#include <vector>

#include "curlra/kernels.hpp"
#include "curlra/matrix.hpp"

namespace curlra {

enum class NormKind { spectral, frobenius, chebyshev };

// W ~ S diag(sigma) T^H with orthonormal columns in S (m x r) and T (n x r).
template <Scalar F>
struct TopSvd {
  Matrix<F> S;
  std::vector<double> sigma;
  Matrix<F> T;

  std::size_t rank() const { return sigma.size(); }
};

// Full thin SVD (r = min(m, n)): Golub-Kahan bidiagonalization and implicit
// shifted QR, falling back to one-sided Jacobi if QR stalls.
template <Scalar T>
TopSvd<T> svd(const Matrix<T>& W);
template <Scalar T>
TopSvd<T> svd_jacobi(const Matrix<T>& W);
// Singular values only, nonincreasing.
template <Scalar T>
std::vector<double> singular_values(const Matrix<T>& W);

template <Scalar T>
TopSvd<T> truncate(const TopSvd<T>& s, std::size_t r);
template <Scalar T>
Matrix<T> reconstruct(const TopSvd<T>& s);

template <Scalar T>
double norm(const Matrix<T>& W, NormKind kind);

// Singular values at or below rel_tol * sigma_1 are treated as zero.
template <Scalar T>
Matrix<T> pinv(const Matrix<T>& W, double rel_tol = 1e-12);
// Pseudo-inverse of the rank-r truncation of W.
template <Scalar T>
Matrix<T> pinv_truncated(const Matrix<T>& W, std::size_t r, double rel_tol = 1e-12);
template <Scalar T>
Matrix<T> pinv_of(const TopSvd<T>& s, double rel_tol = 1e-12);

// Count of singular values strictly above an absolute threshold.
template <Scalar T>
std::size_t numerical_rank(const Matrix<T>& W, double tol = 1e-6);

template <Scalar T>
double volume(const Matrix<T>& W);
template <Scalar T>
double projective_volume(const Matrix<T>& W, std::size_t r);
// Sum of log singular values; -inf for a rank-deficient argument.
template <Scalar T>
double log_volume(const Matrix<T>& W);
template <Scalar T>
double log_projective_volume(const Matrix<T>& W, std::size_t r);

template <Scalar T>
bool pinv_product_bound_check(const Matrix<T>& G, const Matrix<T>& Sigma, const Matrix<T>& H);

// A[:, perm] = Q R with Q m x p orthonormal, R p x n upper trapezoidal,
// p = min(m, n, max_steps). Pivot: largest trailing column norm.
template <Scalar T>
struct PivotedQr {
  Matrix<T> Q;
  Matrix<T> R;
  std::vector<std::size_t> perm;
};
template <Scalar T>
PivotedQr<T> qr_pivoted(const Matrix<T>& A, std::size_t max_steps = static_cast<std::size_t>(-1));

// Orthonormal basis for the column space (thin Householder Q, m >= n).
template <Scalar T>
Matrix<T> orthonormal_columns(const Matrix<T>& A);

template <Scalar T>
struct Lu {
  Matrix<T> lu;
  std::vector<std::size_t> piv;
  int sign = 1;
  bool singular = false;
};
template <Scalar T>
Lu<T> lu_factor(const Matrix<T>& A);
template <Scalar T>
Matrix<T> lu_solve(const Lu<T>& f, const Matrix<T>& B);
template <Scalar T>
T determinant(const Matrix<T>& A);
template <Scalar T>
Matrix<T> solve(const Matrix<T>& A, const Matrix<T>& B);
template <Scalar T>
Matrix<T> inverse(const Matrix<T>& A);

template <Scalar T>
double frobenius2(const Matrix<T>& A) {
  double s = 0;
  for (const auto& x : A.storage()) s += abs2(x);
  return s;
}

}  // namespace curlra
