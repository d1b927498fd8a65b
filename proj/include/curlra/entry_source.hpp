#pragma once

#include <vector>

#include "curlra/matrix.hpp"

namespace curlra {

// Read-only view of an input matrix that counts every entry handed out.
// Pipelines only see W through this, so the counter is the access budget.
template <Scalar T>
class EntrySource {
 public:
  explicit EntrySource(const Matrix<T>& W) : W_(&W) {}

  std::size_t rows() const { return W_->rows(); }
  std::size_t cols() const { return W_->cols(); }

  template <class Rows>
  Matrix<T> rows_of(const Rows& I) {
    touched_ += std::size(I) * W_->cols();
    return W_->select_rows(I);
  }
  template <class Cols>
  Matrix<T> cols_of(const Cols& J) {
    touched_ += std::size(J) * W_->rows();
    return W_->select_cols(J);
  }
  template <class Rows, class Cols>
  Matrix<T> block(const Rows& I, const Cols& J) {
    touched_ += std::size(I) * std::size(J);
    return W_->block(I, J);
  }
  T entry(std::size_t i, std::size_t j) {
    ++touched_;
    return (*W_)(i, j);
  }

  // Whole-matrix access for stages documented as not sublinear.
  const Matrix<T>& dense() {
    dense_touched_ += W_->size();
    return *W_;
  }

  std::size_t touched() const { return touched_; }
  std::size_t dense_touched() const { return dense_touched_; }
  void reset() { touched_ = dense_touched_ = 0; }

 private:
  const Matrix<T>* W_;
  std::size_t touched_ = 0;
  std::size_t dense_touched_ = 0;
};

}  // namespace curlra
