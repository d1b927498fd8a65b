#include "curlra/skeleton.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace curlra {

template <Scalar T>
void CurLra<T>::validate() const {
  const std::size_t k = I.size(), l = J.size();
  if (!(r > 0 && r <= k && k <= m && r <= l && l <= n)) throw ArgumentError("CurLra: need 0 < r <= k <= m, r <= l <= n");
  if (I.bound() != m || J.bound() != n) throw ArgumentError("CurLra: index bounds differ from source dimensions");
  if (U.rows() != l || U.cols() != k) throw ArgumentError("CurLra: nucleus must be l x k");
}

template <Scalar T>
Matrix<T> canonical_nucleus(const Matrix<T>& Wkl, std::size_t r) {
  const std::size_t k = Wkl.rows(), l = Wkl.cols();
  if (r == 0 || r > std::min(k, l)) throw ArgumentError("canonical_nucleus: r must lie in [1, min(k, l)]");
  const auto s = svd(Wkl);
  if (k == r && l == r) {
    if (s.sigma[0] == 0 || s.sigma[r - 1] <= kSingularGeneratorTol * s.sigma[0])
      throw SingularGenerator("canonical_nucleus: singular r x r generator");
    return pinv_of(s, 0.0);
  }
  return pinv_of(truncate(s, r), 1e-12);
}

template <Scalar T>
CurLra<T> make_cur(const IndexSet& I, const IndexSet& J, const Matrix<T>& Wkl, std::size_t r, std::size_t m,
                   std::size_t n) {
  CurLra<T> c{I, J, canonical_nucleus(Wkl, r), r, m, n};
  c.validate();
  return c;
}

template <Scalar T>
Matrix<T> reconstruct(const CurLra<T>& cur, const Matrix<T>& W) {
  const Matrix<T> C = W.select_cols(cur.J.indices());
  const Matrix<T> R = W.select_rows(cur.I.indices());
  return matmul(matmul(C, cur.U), R);
}

template <Scalar T>
std::vector<T> apply(const CurLra<T>& cur, const Matrix<T>& W, const std::vector<T>& x) {
  if (x.size() != W.cols()) throw ArgumentError("apply: vector length differs from n");
  const auto Rx = matvec(W.select_rows(cur.I.indices()), x);
  const auto URx = matvec(cur.U, Rx);
  return matvec(W.select_cols(cur.J.indices()), URx);
}

template <Scalar T>
ErrorReport dense_error(const Matrix<T>& W, const CurLra<T>& cur, NormKind kind, bool with_tail) {
  ErrorReport e;
  e.kind = kind;
  const Matrix<T> E = W - reconstruct(cur, W);
  e.absolute = norm(E, kind);
  const double w = norm(W, kind);
  e.relative = w == 0 ? e.absolute : e.absolute / w;
  if (with_tail) {
    const auto s = singular_values(W);
    double tail = 0;
    if (kind == NormKind::frobenius) {
      for (std::size_t j = cur.r; j < s.size(); ++j) tail += s[j] * s[j];
      tail = std::sqrt(tail);
    } else {
      tail = cur.r < s.size() ? s[cur.r] : 0.0;
    }
    e.sigma_tail = tail;
  }
  return e;
}

AprioriBound apriori_error_bound(const AprioriInputs& in) {
  if (in.normC < 0 || in.normR < 0 || in.normU < 0 || in.sigma_tail < 0 || in.normU_spectral < 0)
    throw ArgumentError("apriori_error_bound: norms must be nonnegative");
  if (in.kind == NormKind::chebyshev) throw ArgumentError("apriori_error_bound: spectral or Frobenius norm only");
  AprioriBound b;
  const bool full = in.r == std::min(in.k, in.l);
  b.eta = full ? 1.0 : 2.0;
  if (in.kind == NormKind::frobenius)
    b.mu = 1.0;
  else
    b.mu = full ? std::numbers::sqrt2 : (1 + std::sqrt(5.0)) / 2;
  b.theta = in.normU_spectral * b.eta * in.sigma_tail;
  if (b.theta >= 1) return b;
  b.available = true;
  b.xi = (in.kind == NormKind::frobenius ? std::sqrt(double(in.k * in.l)) : 1.0) / (1 - b.theta);
  const double s = in.sigma_tail;
  b.value = s * ((in.normR + in.normC + s + b.mu * b.eta * in.normC * in.normR * in.normU) * b.xi * in.normU + 1);
  return b;
}

template <Scalar T>
AprioriBound apriori_error_bound(const CurLra<T>& cur, const Matrix<T>& W, double sigma_tail, NormKind kind) {
  AprioriInputs in;
  in.normC = norm(W.select_cols(cur.J.indices()), kind);
  in.normR = norm(W.select_rows(cur.I.indices()), kind);
  in.normU = norm(cur.U, kind);
  in.normU_spectral = norm(cur.U, NormKind::spectral);
  in.sigma_tail = sigma_tail;
  in.k = cur.k();
  in.l = cur.l();
  in.r = cur.r;
  in.kind = kind;
  return apriori_error_bound(in);
}

template <Scalar T>
PosteriorReport posterior_error_sampled(EntrySource<T>& W, const CurLra<T>& cur, std::size_t q, std::size_t s,
                                        Rng& rng, double null_variance, double alpha) {
  if (q * s < 100) throw ArgumentError("posterior_error_sampled: need q*s >= 100");
  if (q > W.rows() || s > W.cols()) throw ArgumentError("posterior_error_sampled: grid exceeds the matrix");
  const auto Iq = rng.sample_without_replacement(W.rows(), q);
  const auto Js = rng.sample_without_replacement(W.cols(), s);
  // E on the grid: W[Iq, Js] - W[Iq, J] U W[I, Js].
  const Matrix<T> Wg = W.block(Iq, Js);
  const Matrix<T> Cg = W.block(Iq, cur.J.indices());
  const Matrix<T> Rg = W.block(cur.I.indices(), Js);
  const Matrix<T> E = Wg - matmul(matmul(Cg, cur.U), Rg);

  PosteriorReport rep;
  const std::size_t K = E.size();
  rep.samples = K;
  cplx mean = 0;
  for (const auto& g : E.storage()) mean += cplx(g);
  mean /= double(K);
  double var = 0;
  for (const auto& g : E.storage()) var += std::norm(cplx(g) - mean);
  var /= double(K);
  rep.mean = mean;
  rep.variance = var;
  rep.frobenius_estimate = std::sqrt(double(W.rows()) * double(W.cols()) / double(K) * frobenius2(E));
  if (null_variance > 0) {
    // Real entries carry one degree of freedom each, complex ones two.
    const double dof_per = is_complex_v<T> ? 2.0 : 1.0;
    const double dof = dof_per * double(K - 1);
    boost::math::chi_squared chi(dof);
    rep.statistic = dof_per * double(K) * var / null_variance;
    rep.threshold = boost::math::quantile(boost::math::complement(chi, alpha));
    rep.within_tolerance = rep.statistic <= rep.threshold;
  }
  return rep;
}

template <Scalar T>
Matrix<T> nucleus_md09(const Matrix<T>& W, const Matrix<T>& C, const Matrix<T>& R) {
  if (C.rows() != W.rows() || R.cols() != W.cols()) throw ArgumentError("nucleus_md09: inconsistent shapes");
  return matmul(matmul(pinv(C), W), pinv(R));
}

template <Scalar T>
void write_cur(std::ostream& out, const CurLra<T>& cur) {
  out << "%%CurLra " << (is_complex_v<T> ? "complex" : "real") << '\n';
  out << cur.m << ' ' << cur.n << ' ' << cur.r << ' ' << cur.k() << ' ' << cur.l() << '\n';
  out << 'I';
  for (auto i : cur.I) out << ' ' << i;
  out << "\nJ";
  for (auto j : cur.J) out << ' ' << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < cur.U.rows(); ++i) {
    for (std::size_t j = 0; j < cur.U.cols(); ++j) {
      if (j) out << ' ';
      if constexpr (is_complex_v<T>)
        out << cur.U(i, j).real() << ' ' << cur.U(i, j).imag();
      else
        out << cur.U(i, j);
    }
    out << '\n';
  }
}

namespace {

template <Scalar T>
CurLra<T> read_cur_body(std::istream& in, std::size_t& line) {
  std::string s;
  auto next = [&](const char* what) {
    if (!std::getline(in, s)) throw ParseError(std::string("CurLra: missing ") + what, line + 1);
    ++line;
    return std::istringstream(s);
  };
  std::size_t m, n, r, k, l;
  {
    auto ss = next("dimensions");
    if (!(ss >> m >> n >> r >> k >> l)) throw ParseError("CurLra: malformed dimension line", line);
  }
  auto read_set = [&](char tag, std::size_t count, std::size_t bound) {
    auto ss = next("index set");
    char t;
    if (!(ss >> t) || t != tag) throw ParseError(std::string("CurLra: expected index set ") + tag, line);
    std::vector<std::size_t> v(count);
    for (auto& x : v)
      if (!(ss >> x)) throw ParseError("CurLra: short index set", line);
    try {
      return IndexSet(std::move(v), bound);
    } catch (const ArgumentError& e) {
      throw ParseError(std::string("CurLra: ") + e.what(), line);
    }
  };
  CurLra<T> c;
  c.m = m;
  c.n = n;
  c.r = r;
  c.I = read_set('I', k, m);
  c.J = read_set('J', l, n);
  c.U = Matrix<T>(l, k);
  for (std::size_t i = 0; i < l; ++i) {
    auto ss = next("nucleus row");
    for (std::size_t j = 0; j < k; ++j) {
      double re = 0, im = 0;
      if (!(ss >> re)) throw ParseError("CurLra: short nucleus row", line);
      if constexpr (is_complex_v<T>) {
        if (!(ss >> im)) throw ParseError("CurLra: missing imaginary part", line);
        c.U(i, j) = T(re, im);
      } else {
        c.U(i, j) = re;
      }
    }
  }
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(e.what(), line);
  }
  return c;
}

}  // namespace

AnyCur read_cur(std::istream& in) {
  std::string head, field;
  if (!std::getline(in, head)) throw ParseError("CurLra: empty input", 1);
  std::istringstream hs(head);
  std::string tag;
  hs >> tag >> field;
  if (tag != "%%CurLra") throw ParseError("CurLra: missing header", 1);
  std::size_t line = 1;
  if (field == "real") return read_cur_body<double>(in, line);
  if (field == "complex") return read_cur_body<cplx>(in, line);
  throw ParseError("CurLra: unknown field '" + field + "'", 1);
}

#define CURLRA_SKELETON(T)                                                                                     \
  template struct CurLra<T>;                                                                                   \
  template Matrix<T> canonical_nucleus(const Matrix<T>&, std::size_t);                                         \
  template CurLra<T> make_cur(const IndexSet&, const IndexSet&, const Matrix<T>&, std::size_t, std::size_t,    \
                              std::size_t);                                                                    \
  template Matrix<T> reconstruct(const CurLra<T>&, const Matrix<T>&);                                          \
  template std::vector<T> apply(const CurLra<T>&, const Matrix<T>&, const std::vector<T>&);                    \
  template ErrorReport dense_error(const Matrix<T>&, const CurLra<T>&, NormKind, bool);                        \
  template AprioriBound apriori_error_bound(const CurLra<T>&, const Matrix<T>&, double, NormKind);             \
  template PosteriorReport posterior_error_sampled(EntrySource<T>&, const CurLra<T>&, std::size_t, std::size_t, \
                                                   Rng&, double, double);                                      \
  template Matrix<T> nucleus_md09(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&);                       \
  template void write_cur(std::ostream&, const CurLra<T>&);
CURLRA_SKELETON(double)
CURLRA_SKELETON(cplx)
#undef CURLRA_SKELETON

}  // namespace curlra
