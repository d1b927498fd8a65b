#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <type_traits>
#include <vector>

#include "curlra/errors.hpp"

namespace curlra {

using cplx = std::complex<double>;

template <class T>
inline constexpr bool is_complex_v = false;
template <>
inline constexpr bool is_complex_v<cplx> = true;

template <class T>
concept Scalar = std::is_same_v<T, double> || std::is_same_v<T, cplx>;

inline double conj(double x) { return x; }
inline cplx conj(const cplx& x) { return std::conj(x); }
inline double abs2(double x) { return x * x; }
inline double abs2(const cplx& x) { return std::norm(x); }
inline double real_part(double x) { return x; }
inline double real_part(const cplx& x) { return x.real(); }

enum class Field { real, complex };

// Dense row-major matrix.
template <Scalar T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t m, std::size_t n) : m_(m), n_(n), a_(m * n, T(0)) {}
  Matrix(std::size_t m, std::size_t n, const T& fill) : m_(m), n_(n), a_(m * n, fill) {}
  Matrix(std::size_t m, std::size_t n, std::vector<T> data) : m_(m), n_(n), a_(std::move(data)) {
    if (a_.size() != m * n) throw ArgumentError("Matrix: data size does not match shape");
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    m_ = rows.size();
    n_ = m_ ? rows.begin()->size() : 0;
    a_.reserve(m_ * n_);
    for (const auto& r : rows) {
      if (r.size() != n_) throw ArgumentError("Matrix: ragged initializer");
      a_.insert(a_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = T(1);
    return I;
  }

  static constexpr Field field() { return is_complex_v<T> ? Field::complex : Field::real; }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::size_t size() const { return a_.size(); }
  bool empty() const { return a_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  T* data() { return a_.data(); }
  const T* data() const { return a_.data(); }
  std::span<T> row(std::size_t i) { return {a_.data() + i * n_, n_}; }
  std::span<const T> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }
  const std::vector<T>& storage() const { return a_; }

  std::vector<T> col(std::size_t j) const {
    std::vector<T> c(m_);
    for (std::size_t i = 0; i < m_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Matrix transpose() const {
    Matrix t(n_, m_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix adjoint() const {
    Matrix t(n_, m_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = curlra::conj((*this)(i, j));
    return t;
  }

  template <class Rows, class Cols>
  Matrix block(const Rows& I, const Cols& J) const {
    Matrix b(std::size(I), std::size(J));
    std::size_t p = 0;
    for (auto i : I) {
      std::size_t q = 0;
      for (auto j : J) b(p, q++) = (*this)(i, j);
      ++p;
    }
    return b;
  }

  template <class Rows>
  Matrix select_rows(const Rows& I) const {
    Matrix b(std::size(I), n_);
    std::size_t p = 0;
    for (auto i : I) {
      std::copy_n(a_.data() + static_cast<std::size_t>(i) * n_, n_, b.a_.data() + p * n_);
      ++p;
    }
    return b;
  }

  template <class Cols>
  Matrix select_cols(const Cols& J) const {
    Matrix b(m_, std::size(J));
    for (std::size_t i = 0; i < m_; ++i) {
      std::size_t q = 0;
      for (auto j : J) b(i, q++) = (*this)(i, j);
    }
    return b;
  }

  // Contiguous block [r0, r0+p) x [c0, c0+q).
  Matrix slice(std::size_t r0, std::size_t c0, std::size_t p, std::size_t q) const {
    Matrix b(p, q);
    for (std::size_t i = 0; i < p; ++i)
      std::copy_n(a_.data() + (r0 + i) * n_ + c0, q, b.a_.data() + i * q);
    return b;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o);
    for (std::size_t t = 0; t < a_.size(); ++t) a_[t] += o.a_[t];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o);
    for (std::size_t t = 0; t < a_.size(); ++t) a_[t] -= o.a_[t];
    return *this;
  }
  Matrix& operator*=(const T& s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, const T& s) { return a *= s; }
  friend Matrix operator*(const T& s, Matrix a) { return a *= s; }

  bool operator==(const Matrix& o) const { return m_ == o.m_ && n_ == o.n_ && a_ == o.a_; }

 private:
  void check_same(const Matrix& o) const {
    if (m_ != o.m_ || n_ != o.n_) throw ArgumentError("Matrix: shape mismatch");
  }

  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::vector<T> a_;
};

using Mat = Matrix<double>;
using CMat = Matrix<cplx>;

inline CMat to_complex(const Mat& A) {
  CMat C(A.rows(), A.cols());
  for (std::size_t t = 0; t < A.size(); ++t) C.data()[t] = A.data()[t];
  return C;
}

template <Scalar T>
Matrix<T> diag(const std::vector<double>& d) {
  Matrix<T> D(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) D(i, i) = d[i];
  return D;
}

// Strictly increasing indices below a bound.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::vector<std::size_t> idx, std::size_t bound) : idx_(std::move(idx)), bound_(bound) {
    for (std::size_t t = 0; t < idx_.size(); ++t) {
      if (idx_[t] >= bound_) throw ArgumentError("IndexSet: index out of bound");
      if (t && idx_[t] <= idx_[t - 1]) throw ArgumentError("IndexSet: indices must be strictly increasing");
    }
  }
  // Sorts and removes duplicates.
  static IndexSet from_unsorted(std::vector<std::size_t> idx, std::size_t bound) {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return IndexSet(std::move(idx), bound);
  }
  static IndexSet range(std::size_t count, std::size_t bound) {
    std::vector<std::size_t> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = i;
    return IndexSet(std::move(v), bound);
  }

  std::size_t size() const { return idx_.size(); }
  std::size_t bound() const { return bound_; }
  std::size_t operator[](std::size_t t) const { return idx_[t]; }
  auto begin() const { return idx_.begin(); }
  auto end() const { return idx_.end(); }
  const std::vector<std::size_t>& indices() const { return idx_; }
  bool contains(std::size_t i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }
  bool operator==(const IndexSet& o) const { return idx_ == o.idx_ && bound_ == o.bound_; }

 private:
  std::vector<std::size_t> idx_;
  std::size_t bound_ = 0;
};

}  // namespace curlra
