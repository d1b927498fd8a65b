#include "curlra/kernels.hpp"

#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace curlra::kernels {

namespace {

constexpr std::size_t kParallelWork = 1u << 15;

template <Scalar T>
void check_gemm(const Matrix<T>& A, const Matrix<T>& B, Op opA) {
  const std::size_t inner = opA == Op::none ? A.cols() : A.rows();
  if (inner != B.rows()) throw ArgumentError("gemm: inner dimensions differ");
}

// Row i of op(A) * B accumulated into c (length B.cols()).
template <Scalar T>
void gemm_row(const Matrix<T>& A, const Matrix<T>& B, Op opA, std::size_t i, T* c) {
  const std::size_t n = B.cols();
  if (opA == Op::none) {
    for (std::size_t p = 0; p < A.cols(); ++p) {
      const T a = A(i, p);
      if (a == T(0)) continue;
      const T* b = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += a * b[j];
    }
  } else {
    for (std::size_t p = 0; p < A.rows(); ++p) {
      const T a = curlra::conj(A(p, i));
      if (a == T(0)) continue;
      const T* b = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += a * b[j];
    }
  }
}

}  // namespace

template <Scalar T>
Matrix<T> gemm_reference(const Matrix<T>& A, const Matrix<T>& B, Op opA) {
  check_gemm(A, B, opA);
  const std::size_t m = opA == Op::none ? A.rows() : A.cols();
  Matrix<T> C(m, B.cols());
  for (std::size_t i = 0; i < m; ++i) gemm_row(A, B, opA, i, C.data() + i * B.cols());
  return C;
}

template <Scalar T>
Matrix<T> gemm_parallel(const Matrix<T>& A, const Matrix<T>& B, Op opA) {
  check_gemm(A, B, opA);
  const std::size_t m = opA == Op::none ? A.rows() : A.cols();
  Matrix<T> C(m, B.cols());
  const std::size_t work = m * B.rows() * B.cols();
  const long long mm = static_cast<long long>(m);
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (long long i = 0; i < mm; ++i) gemm_row(A, B, opA, static_cast<std::size_t>(i), C.data() + i * B.cols());
  return C;
}

template <Scalar T>
KernelCount butterfly_columns_reference(Matrix<T>& X, std::size_t stride0) {
  const std::size_t n = X.rows(), c = X.cols();
  KernelCount k;
  for (std::size_t h = stride0; h < n; h *= 2) {
    for (std::size_t base = 0; base < n; base += 2 * h) {
      for (std::size_t i = base; i < base + h; ++i) {
        T* a = X.data() + i * c;
        T* b = X.data() + (i + h) * c;
        for (std::size_t j = 0; j < c; ++j) {
          const T u = a[j], v = b[j];
          a[j] = u + v;
          b[j] = u - v;
        }
        k.adds += 2 * c;
      }
    }
  }
  return k;
}

template <Scalar T>
void butterfly_columns_parallel(Matrix<T>& X, std::size_t stride0) {
  const std::size_t n = X.rows(), c = X.cols();
  const bool par = n * c > kParallelWork;
  for (std::size_t h = stride0; h < n; h *= 2) {
    const long long pairs = static_cast<long long>(n / 2);
#pragma omp parallel for schedule(static) if (par)
    for (long long t = 0; t < pairs; ++t) {
      const std::size_t blk = static_cast<std::size_t>(t) / h, off = static_cast<std::size_t>(t) % h;
      const std::size_t i = blk * 2 * h + off;
      T* a = X.data() + i * c;
      T* b = X.data() + (i + h) * c;
      for (std::size_t j = 0; j < c; ++j) {
        const T u = a[j], v = b[j];
        a[j] = u + v;
        b[j] = u - v;
      }
    }
  }
}

namespace {

void check_dif(const CMat& X, std::size_t levels) {
  const std::size_t n = X.rows();
  if (levels == 0 || (n >> levels) == 0 || ((n >> levels) << levels) != n)
    throw ArgumentError("dif: rows must be divisible by 2^levels");
}

cplx twiddle(std::size_t i, std::size_t L) {
  return std::polar(1.0, 2.0 * std::numbers::pi * double(i) / double(L));
}

}  // namespace

KernelCount dif_columns_reference(CMat& X, std::size_t levels) {
  check_dif(X, levels);
  const std::size_t n = X.rows(), c = X.cols();
  KernelCount k;
  for (std::size_t L = n, lev = 0; lev < levels; L /= 2, ++lev) {
    const std::size_t h = L / 2;
    for (std::size_t base = 0; base < n; base += L) {
      for (std::size_t i = 0; i < h; ++i) {
        const cplx w = twiddle(i, L);
        cplx* a = X.data() + (base + i) * c;
        cplx* b = X.data() + (base + i + h) * c;
        for (std::size_t j = 0; j < c; ++j) {
          const cplx u = a[j], v = b[j];
          a[j] = u + v;
          b[j] = (u - v) * w;
        }
        k.adds += 2 * c;
        k.mults += c;
      }
    }
  }
  return k;
}

void dif_columns_parallel(CMat& X, std::size_t levels) {
  check_dif(X, levels);
  const std::size_t n = X.rows(), c = X.cols();
  const bool par = n * c > kParallelWork;
  for (std::size_t L = n, lev = 0; lev < levels; L /= 2, ++lev) {
    const std::size_t h = L / 2;
    const long long pairs = static_cast<long long>(n / 2);
#pragma omp parallel for schedule(static) if (par)
    for (long long t = 0; t < pairs; ++t) {
      const std::size_t blk = static_cast<std::size_t>(t) / h, i = static_cast<std::size_t>(t) % h;
      const cplx w = twiddle(i, L);
      cplx* a = X.data() + (blk * L + i) * c;
      cplx* b = a + h * c;
      for (std::size_t j = 0; j < c; ++j) {
        const cplx u = a[j], v = b[j];
        a[j] = u + v;
        b[j] = (u - v) * w;
      }
    }
  }
}

void dif_adjoint_columns_parallel(CMat& X, std::size_t levels) {
  check_dif(X, levels);
  const std::size_t n = X.rows(), c = X.cols();
  const bool par = n * c > kParallelWork;
  for (std::size_t lev = levels; lev-- > 0;) {
    const std::size_t L = n >> lev, h = L / 2;
    const long long pairs = static_cast<long long>(n / 2);
#pragma omp parallel for schedule(static) if (par)
    for (long long t = 0; t < pairs; ++t) {
      const std::size_t blk = static_cast<std::size_t>(t) / h, i = static_cast<std::size_t>(t) % h;
      const cplx w = std::conj(twiddle(i, L));
      cplx* a = X.data() + (blk * L + i) * c;
      cplx* b = a + h * c;
      for (std::size_t j = 0; j < c; ++j) {
        const cplx u = a[j], v = b[j] * w;
        a[j] = u + v;
        b[j] = u - v;
      }
    }
  }
}

template <Scalar T>
double diff_frobenius2_reference(const Matrix<T>& A, const Matrix<T>& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw ArgumentError("diff_frobenius2: shape mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < A.size(); ++t) s += abs2(A.data()[t] - B.data()[t]);
  return s;
}

template <Scalar T>
double diff_frobenius2_parallel(const Matrix<T>& A, const Matrix<T>& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw ArgumentError("diff_frobenius2: shape mismatch");
  double s = 0.0;
  const long long N = static_cast<long long>(A.size());
#pragma omp parallel for reduction(+ : s) schedule(static) if (A.size() > kParallelWork)
  for (long long t = 0; t < N; ++t) s += abs2(A.data()[t] - B.data()[t]);
  return s;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

#define CURLRA_KERNELS(T)                                                          \
  template Matrix<T> gemm_reference(const Matrix<T>&, const Matrix<T>&, Op);     \
  template Matrix<T> gemm_parallel(const Matrix<T>&, const Matrix<T>&, Op);      \
  template KernelCount butterfly_columns_reference(Matrix<T>&, std::size_t);     \
  template void butterfly_columns_parallel(Matrix<T>&, std::size_t);             \
  template double diff_frobenius2_reference(const Matrix<T>&, const Matrix<T>&); \
  template double diff_frobenius2_parallel(const Matrix<T>&, const Matrix<T>&);
CURLRA_KERNELS(double)
CURLRA_KERNELS(cplx)
#undef CURLRA_KERNELS

}  // namespace curlra::kernels
