#pragma once

#include <vector>

#include "curlra/linalg.hpp"

namespace curlra {

struct MaxvolOptions {
  double swap_tol = 1e-12;
  std::size_t max_iter = 0;  // 0: 10 * n * r
};

struct MaxvolResult {
  IndexSet selected;
  std::size_t iterations = 0;
  double log_volume = 0;
  double certificate = 0;  // max |entry| of B^-1 A at exit
  bool capped = false;     // hit max_iter; selected is the best so far
  std::vector<double> swap_log_gain;  // log |c_ij| of every accepted swap
};

// Swaps columns of an r x n matrix until B = A[:, J] dominates: |B^-1 A| <= 1 + swap_tol.
template <Scalar T>
MaxvolResult dominant_submatrix(const Matrix<T>& A, const IndexSet& start, const MaxvolOptions& opt = {});

// r column pivots of LU with complete pivoting on A.
template <Scalar T>
IndexSet lup_init(const Matrix<T>& A);

// LUP start, then dominant_submatrix.
template <Scalar T>
MaxvolResult lup_ca(const Matrix<T>& A, const MaxvolOptions& opt = {});

struct GreedyResult {
  IndexSet selected;
  std::vector<std::size_t> order;  // columns in the order they were taken
  double log_volume = 0;
  bool degenerate = false;         // some step found no volume to add
};

// q <= r columns of an r x n matrix, each maximizing the residual norm.
template <Scalar T>
GreedyResult greedy_grow_tall(const Matrix<T>& W, std::size_t q);

// Extends a nonsingular r x r start to q > r columns, each step maximizing the volume.
template <Scalar T>
GreedyResult greedy_grow_wide(const Matrix<T>& W, const IndexSet& start, std::size_t q);

// Drops columns of W[:, set] down to p, each step keeping the largest volume.
template <Scalar T>
GreedyResult greedy_contract(const Matrix<T>& W, const IndexSet& set, std::size_t p);

// l columns of a k x n matrix of numerical rank r with near-maximal r-projective volume.
template <Scalar T>
IndexSet projective_maxvol(const Matrix<T>& W, std::size_t r, std::size_t l, double rank_tol = 1e-8);

enum class RrqrBackend { qr, lu };

struct RrqrOptions {
  double h = 1.1;
  RrqrBackend backend = RrqrBackend::qr;
  std::size_t max_swaps = 1000;
};

// t_{p,r,h} = sqrt((p - r) r h^2 + 1).
double rrqr_certificate(std::size_t p, std::size_t r, double h);

// r rows of W by strong rank-revealing selection.
template <Scalar T>
IndexSet rrqr_select(const Matrix<T>& W, std::size_t r, const RrqrOptions& opt = {});
template <Scalar T>
IndexSet rrqr_select_columns(const Matrix<T>& W, std::size_t r, const RrqrOptions& opt = {});

}  // namespace curlra
