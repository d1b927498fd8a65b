#pragma once

// Hot dense kernels. Each has a serial reference used by the tests and a
// parallel version used everywhere else.

#include <vector>

#include "curlra/matrix.hpp"

namespace curlra::kernels {

enum class Op { none, adjoint };

// C = op(A) * B.
template <Scalar T>
Matrix<T> gemm_reference(const Matrix<T>& A, const Matrix<T>& B, Op opA = Op::none);
template <Scalar T>
Matrix<T> gemm_parallel(const Matrix<T>& A, const Matrix<T>& B, Op opA = Op::none);

struct KernelCount {
  std::size_t adds = 0;   // additions and subtractions
  std::size_t mults = 0;  // multiplications by twiddles
};

// Unnormalized Walsh-Hadamard butterflies at strides s, 2s, ..., n/2 applied
// to every column of X in place; X.rows() must be a power of two times s.
// The reference versions count the arithmetic they perform.
template <Scalar T>
KernelCount butterfly_columns_reference(Matrix<T>& X, std::size_t stride0);
template <Scalar T>
void butterfly_columns_parallel(Matrix<T>& X, std::size_t stride0);

// Radix-2 decimation-in-frequency stages on every column, block sizes n, n/2,
// ..., n/2^(levels-1): (u, v) -> (u + v, (u - v) w^i), w = exp(2 pi i / L).
// Outputs stay in the in-place (bit-reversed) order.
KernelCount dif_columns_reference(CMat& X, std::size_t levels);
void dif_columns_parallel(CMat& X, std::size_t levels);
// Adjoint of the above, stages in reverse order.
void dif_adjoint_columns_parallel(CMat& X, std::size_t levels);

// Frobenius norm squared of A - B without materializing the difference.
template <Scalar T>
double diff_frobenius2_reference(const Matrix<T>& A, const Matrix<T>& B);
template <Scalar T>
double diff_frobenius2_parallel(const Matrix<T>& A, const Matrix<T>& B);

int max_threads();

}  // namespace curlra::kernels

namespace curlra {

template <Scalar T>
Matrix<T> matmul(const Matrix<T>& A, const Matrix<T>& B) {
  return kernels::gemm_parallel(A, B, kernels::Op::none);
}

// A^H * B.
template <Scalar T>
Matrix<T> matmul_adj(const Matrix<T>& A, const Matrix<T>& B) {
  return kernels::gemm_parallel(A, B, kernels::Op::adjoint);
}

template <Scalar T>
std::vector<T> matvec(const Matrix<T>& A, const std::vector<T>& x) {
  if (A.cols() != x.size()) throw ArgumentError("matvec: shape mismatch");
  std::vector<T> y(A.rows(), T(0));
  for (std::size_t i = 0; i < A.rows(); ++i) {
    T s(0);
    auto r = A.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace curlra
