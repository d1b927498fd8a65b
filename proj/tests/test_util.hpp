#pragma once

#include <Eigen/Dense>

#include "curlra/linalg.hpp"
#include "curlra/random.hpp"

namespace curlra::testing {

inline Mat random_mat(std::size_t m, std::size_t n, Rng& rng) {
  Mat A(m, n);
  for (std::size_t t = 0; t < A.size(); ++t) A.data()[t] = rng.normal();
  return A;
}

inline CMat random_cmat(std::size_t m, std::size_t n, Rng& rng) {
  CMat A(m, n);
  for (std::size_t t = 0; t < A.size(); ++t) A.data()[t] = {rng.normal(), rng.normal()};
  return A;
}

inline Mat random_rank(std::size_t m, std::size_t n, std::size_t r, Rng& rng) {
  return matmul(random_mat(m, r, rng), random_mat(r, n, rng));
}

template <Scalar T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> to_eigen(const Matrix<T>& A) {
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> E(A.rows(), A.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) E(i, j) = A(i, j);
  return E;
}

// Independent singular values (Eigen's two-sided Jacobi).
template <Scalar T>
std::vector<double> oracle_singular_values(const Matrix<T>& A) {
  Eigen::JacobiSVD<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>> s(to_eigen(A));
  const auto& v = s.singularValues();
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Mat eigen_pinv(const Mat& A) {
  const Eigen::MatrixXd P = to_eigen(A).completeOrthogonalDecomposition().pseudoInverse();
  Mat out(A.cols(), A.rows());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = P(i, j);
  return out;
}

template <Scalar T>
double rel_diff(const Matrix<T>& A, const Matrix<T>& B) {
  const double d = std::sqrt(kernels::diff_frobenius2_reference(A, B));
  const double s = std::sqrt(frobenius2(B));
  return s == 0 ? d : d / s;
}

inline double ortho_defect(const Mat& Q) {
  return std::sqrt(frobenius2(matmul_adj(Q, Q) - Mat::identity(Q.cols())));
}
inline double ortho_defect(const CMat& Q) {
  return std::sqrt(frobenius2(matmul_adj(Q, Q) - CMat::identity(Q.cols())));
}

}  // namespace curlra::testing
