#include "curlra/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace curlra {

namespace {

constexpr char kMagic[8] = {'C', 'U', 'R', 'L', 'R', 'A', 'M', 'X'};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

enum class Symmetry { general, symmetric, skew, hermitian };
enum class Kind { real, integer, complex, pattern };

struct LineReader {
  std::istream& in;
  std::size_t line = 0;
  bool next(std::string& s) {
    while (std::getline(in, s)) {
      ++line;
      if (!s.empty() && s.back() == '\r') s.pop_back();
      const auto p = s.find_first_not_of(" \t");
      if (p == std::string::npos || s[p] == '%') continue;
      return true;
    }
    return false;
  }
};

void guard_size(std::size_t m, std::size_t n, std::size_t line) {
  if (m == 0 || n == 0) throw ParseError("matrix dimensions must be positive", line);
  if (m > kMaxEntries || n > kMaxEntries || m * n > kMaxEntries)
    throw ParseError("matrix exceeds the entry limit", line);
}

template <Scalar T>
AnyMatrix finish(Matrix<T> A) {
  return AnyMatrix(std::move(A));
}

template <Scalar T>
T read_value(std::istringstream& ss, Kind kind, std::size_t line) {
  if (kind == Kind::pattern) return T(1);
  double re = 0, im = 0;
  if (!(ss >> re)) throw ParseError("expected a numeric value", line);
  if (kind == Kind::complex && !(ss >> im)) throw ParseError("expected an imaginary part", line);
  if constexpr (is_complex_v<T>)
    return T(re, im);
  else
    return re;
}

template <Scalar T>
void mirror(Matrix<T>& A, std::size_t i, std::size_t j, const T& v, Symmetry sym) {
  if (i == j || sym == Symmetry::general) return;
  if (sym == Symmetry::symmetric) A(j, i) += v;
  if (sym == Symmetry::skew) A(j, i) -= v;
  if (sym == Symmetry::hermitian) A(j, i) += curlra::conj(v);
}

template <Scalar T>
Matrix<T> read_body(LineReader& rd, bool coordinate, Kind kind, Symmetry sym) {
  std::string s;
  if (!rd.next(s)) throw ParseError("missing size line", rd.line);
  std::istringstream hdr(s);
  std::size_t m = 0, n = 0, nnz = 0;
  if (!(hdr >> m >> n)) throw ParseError("malformed size line", rd.line);
  if (coordinate && !(hdr >> nnz)) throw ParseError("coordinate size line needs nnz", rd.line);
  guard_size(m, n, rd.line);
  if (sym != Symmetry::general && m != n) throw ParseError("symmetric storage requires a square matrix", rd.line);
  Matrix<T> A(m, n);
  if (coordinate) {
    for (std::size_t t = 0; t < nnz; ++t) {
      if (!rd.next(s)) throw ParseError("unexpected end of file", rd.line);
      std::istringstream ss(s);
      long long i = 0, j = 0;
      if (!(ss >> i >> j)) throw ParseError("malformed coordinate entry", rd.line);
      if (i < 1 || j < 1 || static_cast<std::size_t>(i) > m || static_cast<std::size_t>(j) > n)
        throw ParseError("coordinate index out of range", rd.line);
      const T v = read_value<T>(ss, kind, rd.line);
      A(i - 1, j - 1) += v;
      mirror(A, i - 1, j - 1, v, sym);
    }
  } else {
    // Column-major; symmetric variants store the lower triangle only.
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = (sym == Symmetry::general ? 0 : (sym == Symmetry::skew ? j + 1 : j)); i < m; ++i) {
        if (!rd.next(s)) throw ParseError("unexpected end of file", rd.line);
        std::istringstream ss(s);
        const T v = read_value<T>(ss, kind, rd.line);
        A(i, j) = v;
        mirror(A, i, j, v, sym);
      }
  }
  return A;
}

template <class U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> b;
  std::memcpy(b.data(), &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  out.write(b.data(), b.size());
}

template <class U>
U get_le(std::istream& in) {
  std::array<char, sizeof(U)> b;
  if (!in.read(b.data(), b.size())) throw ParseError("truncated binary matrix", 0);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  U v;
  std::memcpy(&v, b.data(), sizeof(U));
  return v;
}

}  // namespace

AnyMatrix read_matrix_market(std::istream& in) {
  LineReader rd{in};
  std::string banner;
  if (!std::getline(in, banner)) throw ParseError("empty input", 1);
  rd.line = 1;
  std::istringstream bs(banner);
  std::string tag, object, format, field, symmetry;
  bs >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", 1);
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw ParseError("only matrix objects are supported", 1);
  if (format != "array" && format != "coordinate") throw ParseError("unknown format '" + format + "'", 1);
  Kind kind;
  if (field == "real" || field == "double")
    kind = Kind::real;
  else if (field == "integer")
    kind = Kind::integer;
  else if (field == "complex")
    kind = Kind::complex;
  else if (field == "pattern")
    kind = Kind::pattern;
  else
    throw ParseError("unknown field '" + field + "'", 1);
  Symmetry sym;
  if (symmetry == "general")
    sym = Symmetry::general;
  else if (symmetry == "symmetric")
    sym = Symmetry::symmetric;
  else if (symmetry == "skew-symmetric")
    sym = Symmetry::skew;
  else if (symmetry == "hermitian")
    sym = Symmetry::hermitian;
  else
    throw ParseError("unknown symmetry '" + symmetry + "'", 1);
  const bool coordinate = format == "coordinate";
  if (kind == Kind::pattern && !coordinate) throw ParseError("pattern field requires coordinate format", 1);
  if (kind == Kind::complex) return finish(read_body<cplx>(rd, coordinate, kind, sym));
  if (sym == Symmetry::hermitian) throw ParseError("hermitian symmetry requires a complex field", 1);
  return finish(read_body<double>(rd, coordinate, kind, sym));
}

template <Scalar T>
void write_matrix_market(std::ostream& out, const Matrix<T>& A, bool coordinate) {
  const char* field = is_complex_v<T> ? "complex" : "real";
  out << "%%MatrixMarket matrix " << (coordinate ? "coordinate" : "array") << ' ' << field << " general\n";
  out << std::setprecision(17);
  auto put = [&](const T& v) {
    if constexpr (is_complex_v<T>)
      out << v.real() << ' ' << v.imag();
    else
      out << v;
  };
  if (coordinate) {
    std::size_t nnz = 0;
    for (const auto& v : A.storage()) nnz += v != T(0);
    out << A.rows() << ' ' << A.cols() << ' ' << nnz << '\n';
    for (std::size_t j = 0; j < A.cols(); ++j)
      for (std::size_t i = 0; i < A.rows(); ++i)
        if (A(i, j) != T(0)) {
          out << i + 1 << ' ' << j + 1 << ' ';
          put(A(i, j));
          out << '\n';
        }
  } else {
    out << A.rows() << ' ' << A.cols() << '\n';
    for (std::size_t j = 0; j < A.cols(); ++j)
      for (std::size_t i = 0; i < A.rows(); ++i) {
        put(A(i, j));
        out << '\n';
      }
  }
}

AnyMatrix read_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ParseError("bad binary magic", 0);
  const auto m = get_le<std::uint64_t>(in);
  const auto n = get_le<std::uint64_t>(in);
  const auto field = get_le<std::uint32_t>(in);
  get_le<std::uint32_t>(in);
  guard_size(m, n, 0);
  if (field == 0) {
    Mat A(m, n);
    for (std::size_t t = 0; t < A.size(); ++t) A.data()[t] = get_le<double>(in);
    return A;
  }
  if (field == 1) {
    CMat A(m, n);
    for (std::size_t t = 0; t < A.size(); ++t) {
      const double re = get_le<double>(in), im = get_le<double>(in);
      A.data()[t] = {re, im};
    }
    return A;
  }
  throw ParseError("unknown field tag in binary matrix", 0);
}

template <Scalar T>
void write_binary(std::ostream& out, const Matrix<T>& A) {
  out.write(kMagic, 8);
  put_le<std::uint64_t>(out, A.rows());
  put_le<std::uint64_t>(out, A.cols());
  put_le<std::uint32_t>(out, is_complex_v<T> ? 1u : 0u);
  put_le<std::uint32_t>(out, 0u);
  for (const auto& v : A.storage()) {
    if constexpr (is_complex_v<T>) {
      put_le<double>(out, v.real());
      put_le<double>(out, v.imag());
    } else {
      put_le<double>(out, v);
    }
  }
}

AnyMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char head[8] = {};
  in.read(head, 8);
  const bool binary = in.gcount() == 8 && std::memcmp(head, kMagic, 8) == 0;
  in.clear();
  in.seekg(0);
  return binary ? read_binary(in) : read_matrix_market(in);
}

template <Scalar T>
void save_matrix(const std::string& path, const Matrix<T>& A, MatrixFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  if (format == MatrixFormat::binary)
    write_binary(out, A);
  else
    write_matrix_market(out, A, format == MatrixFormat::mm_coordinate);
  if (!out) throw IoError("write failed for '" + path + "'");
}

#define CURLRA_IO(T)                                                           \
  template void write_matrix_market(std::ostream&, const Matrix<T>&, bool);   \
  template void write_binary(std::ostream&, const Matrix<T>&);                \
  template void save_matrix(const std::string&, const Matrix<T>&, MatrixFormat);
CURLRA_IO(double)
CURLRA_IO(cplx)
#undef CURLRA_IO

}  // namespace curlra
