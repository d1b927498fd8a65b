#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "curlra/matrix.hpp"

namespace curlra {

using AnyMatrix = std::variant<Mat, CMat>;

enum class MatrixFormat { mm_array, mm_coordinate, binary };

// Inputs beyond this many entries are rejected.
inline constexpr std::size_t kMaxEntries = 100'000'000;

// Matrix Market (array or coordinate; real, integer, pattern or complex;
// general, symmetric, skew-symmetric or hermitian). Coordinate duplicates sum.
AnyMatrix read_matrix_market(std::istream& in);
template <Scalar T>
void write_matrix_market(std::ostream& out, const Matrix<T>& A, bool coordinate);

// Raw binary: "CURLRAMX", u64 m, u64 n, u32 field (0 real, 1 complex),
// u32 zero, then row-major little-endian doubles (re, im pairs if complex).
AnyMatrix read_binary(std::istream& in);
template <Scalar T>
void write_binary(std::ostream& out, const Matrix<T>& A);

// Dispatches on the leading bytes of the file.
AnyMatrix load_matrix(const std::string& path);
template <Scalar T>
void save_matrix(const std::string& path, const Matrix<T>& A, MatrixFormat format);

}  // namespace curlra
