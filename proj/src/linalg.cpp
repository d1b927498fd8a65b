#include "curlra/linalg.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace curlra {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Column-major scratch matrix.
template <Scalar T>
struct ColMajor {
  std::size_t m, n;
  std::vector<T> a;
  ColMajor(std::size_t m, std::size_t n) : m(m), n(n), a(m * n, T(0)) {}
  T& operator()(std::size_t i, std::size_t j) { return a[i + j * m]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a[i + j * m]; }
  T* col(std::size_t j) { return a.data() + j * m; }

  static ColMajor from(const Matrix<T>& A, bool adjoint) {
    ColMajor c(adjoint ? A.cols() : A.rows(), adjoint ? A.rows() : A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) {
        if (adjoint)
          c(j, i) = curlra::conj(A(i, j));
        else
          c(i, j) = A(i, j);
      }
    return c;
  }
  Matrix<T> to_matrix(std::size_t cols) const {
    Matrix<T> M(m, cols);
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < m; ++i) M(i, j) = (*this)(i, j);
    return M;
  }
};

// Reflector H = I - tau v v^H with v[0] = 1 and H^H x = beta e_1, beta real.
// x (strided) is overwritten with v[1..]; returns tau.
template <Scalar T>
T householder(T* x, std::size_t p, std::size_t stride, double& beta) {
  const T alpha = x[0];
  double xnorm2 = 0;
  for (std::size_t i = 1; i < p; ++i) xnorm2 += abs2(x[i * stride]);
  double alpha_im = 0;
  if constexpr (is_complex_v<T>) alpha_im = alpha.imag();
  if (xnorm2 == 0 && alpha_im == 0) {
    beta = real_part(alpha);
    return T(0);
  }
  const double nrm = std::sqrt(abs2(alpha) + xnorm2);
  beta = real_part(alpha) >= 0 ? -nrm : nrm;
  const T tau = (T(beta) - alpha) / T(beta);
  const T scale = T(1) / (alpha - T(beta));
  for (std::size_t i = 1; i < p; ++i) x[i * stride] *= scale;
  return tau;
}

// Apply H^H (adj = true) or H to columns [j0, j1) of c, rows [k, m).
// v[0] is taken to be 1 regardless of its stored value.
template <Scalar T>
void apply_reflector_left(ColMajor<T>& c, std::size_t k, const T* v, T tau, std::size_t j0, std::size_t j1,
                          bool adj) {
  if (tau == T(0)) return;
  const T t = adj ? curlra::conj(tau) : tau;
  const std::size_t p = c.m - k;
  for (std::size_t j = j0; j < j1; ++j) {
    T* col = c.col(j) + k;
    T w = col[0];
    for (std::size_t i = 1; i < p; ++i) w += curlra::conj(v[i]) * col[i];
    w *= t;
    col[0] -= w;
    for (std::size_t i = 1; i < p; ++i) col[i] -= v[i] * w;
  }
}

struct BidiagFailure {};

// Implicit-shift QR on the real upper bidiagonal (d, e) where e[i] couples
// d[i] and d[i+1]; rotations are mirrored into the columns of U and V.
template <Scalar T>
void bidiagonal_qr(std::vector<double>& d, std::vector<double>& e, ColMajor<T>* U, ColMajor<T>* V) {
  const std::size_t n = d.size();
  // rv1[i] couples d[i-1] and d[i].
  std::vector<double> rv1(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) rv1[i] = e[i - 1];
  double anorm = 0;
  for (std::size_t i = 0; i < n; ++i) anorm = std::max(anorm, std::abs(d[i]) + std::abs(rv1[i]));
  const double small = kEps * anorm;

  auto rot = [](ColMajor<T>* M, std::size_t a, std::size_t b, double c, double s) {
    if (!M) return;
    T* x = M->col(a);
    T* y = M->col(b);
    for (std::size_t r = 0; r < M->m; ++r) {
      const T xa = x[r], yb = y[r];
      x[r] = xa * c + yb * s;
      y[r] = yb * c - xa * s;
    }
  };

  const int maxits = 75;
  for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(n) - 1; k >= 0; --k) {
    for (int its = 0;; ++its) {
      bool flag = true;
      std::ptrdiff_t l = k, nm = 0;
      for (; l >= 0; --l) {
        nm = l - 1;
        if (l == 0 || std::abs(rv1[l]) <= small) {
          flag = false;
          break;
        }
        if (std::abs(d[nm]) <= small) break;
      }
      if (flag) {
        // d[nm] is negligible: chase rv1[l] out with left rotations.
        double c = 0, s = 1;
        for (std::ptrdiff_t i = l; i <= k; ++i) {
          const double f = s * rv1[i];
          rv1[i] = c * rv1[i];
          if (std::abs(f) <= small) break;
          const double g = d[i];
          double h = std::hypot(f, g);
          d[i] = h;
          h = 1.0 / h;
          c = g * h;
          s = -f * h;
          rot(U, nm, i, c, s);
        }
      }
      const double z = d[k];
      if (l == k) {
        if (z < 0) {
          d[k] = -z;
          if (V) {
            T* v = V->col(k);
            for (std::size_t r = 0; r < V->m; ++r) v[r] = -v[r];
          }
        }
        break;
      }
      if (its >= maxits) throw BidiagFailure{};
      double x = d[l];
      nm = k - 1;
      double y = d[nm];
      double g = rv1[nm];
      double h = rv1[k];
      double f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
      g = std::hypot(f, 1.0);
      f = ((x - z) * (x + z) + h * ((y / (f + std::copysign(g, f))) - h)) / x;
      double c = 1, s = 1;
      for (std::ptrdiff_t j = l; j <= nm; ++j) {
        const std::ptrdiff_t i = j + 1;
        g = rv1[i];
        y = d[i];
        h = s * g;
        g = c * g;
        double zz = std::hypot(f, h);
        rv1[j] = zz;
        c = f / zz;
        s = h / zz;
        f = x * c + g * s;
        g = g * c - x * s;
        h = y * s;
        y *= c;
        rot(V, j, i, c, s);
        zz = std::hypot(f, h);
        d[j] = zz;
        if (zz != 0) {
          zz = 1.0 / zz;
          c = f * zz;
          s = h * zz;
        }
        f = c * g + s * y;
        x = c * y - s * g;
        rot(U, j, i, c, s);
      }
      rv1[l] = 0;
      rv1[k] = f;
      d[k] = x;
    }
  }
}

// SVD of a tall (m >= n) column-major matrix.
template <Scalar T>
void svd_tall(ColMajor<T> a, bool vectors, std::vector<double>& sigma, ColMajor<T>* Uout, ColMajor<T>* Vout) {
  const std::size_t m = a.m, n = a.n;
  std::vector<double> d(n, 0.0), e(n, 0.0);
  std::vector<T> tauL(n, T(0)), tauR(n, T(0));
  std::vector<T> rowbuf(n), w(m);

  for (std::size_t k = 0; k < n; ++k) {
    double beta = 0;
    tauL[k] = householder(a.col(k) + k, m - k, 1, beta);
    d[k] = beta;
    {
      // v for the left reflector lives in a(k+1.., k); use a temporary with v[0] = 1.
      T* colk = a.col(k) + k;
      const T saved = colk[0];
      colk[0] = T(1);
      apply_reflector_left(a, k, colk, tauL[k], k + 1, n, true);
      colk[0] = saved;
    }
    if (k + 1 < n) {
      const std::size_t p = n - k - 1;
      for (std::size_t j = 0; j < p; ++j) rowbuf[j] = curlra::conj(a(k, k + 1 + j));
      double betaR = 0;
      const T tau = householder(rowbuf.data(), p, 1, betaR);
      tauR[k] = tau;
      e[k] = betaR;
      rowbuf[0] = T(1);
      // rows k+1..m-1: a_i <- a_i - tau (a_i . v) v^H
      if (tau != T(0)) {
        std::fill(w.begin(), w.end(), T(0));
        for (std::size_t j = 0; j < p; ++j) {
          const T vj = rowbuf[j];
          const T* cj = a.col(k + 1 + j);
          for (std::size_t i = k + 1; i < m; ++i) w[i] += cj[i] * vj;
        }
        for (std::size_t j = 0; j < p; ++j) {
          const T cv = tau * curlra::conj(rowbuf[j]);
          T* cj = a.col(k + 1 + j);
          for (std::size_t i = k + 1; i < m; ++i) cj[i] -= w[i] * cv;
        }
      }
      // Store v[1..] in row k past the superdiagonal.
      for (std::size_t j = 1; j < p; ++j) a(k, k + 1 + j) = rowbuf[j];
    }
  }

  ColMajor<T>* U = nullptr;
  ColMajor<T>* V = nullptr;
  if (vectors) {
    ColMajor<T>& u = *Uout;
    u = ColMajor<T>(m, n);
    for (std::size_t j = 0; j < n; ++j) u(j, j) = T(1);
    std::vector<T> v(m);
    for (std::size_t kk = n; kk-- > 0;) {
      v[kk] = T(1);
      for (std::size_t i = kk + 1; i < m; ++i) v[i] = a(i, kk);
      apply_reflector_left(u, kk, v.data() + kk, tauL[kk], kk, n, false);
    }
    ColMajor<T>& vv = *Vout;
    vv = ColMajor<T>(n, n);
    for (std::size_t j = 0; j < n; ++j) vv(j, j) = T(1);
    std::vector<T> vr(n);
    for (std::size_t kk = n >= 2 ? n - 1 : 0; kk-- > 0;) {
      vr[kk + 1] = T(1);
      for (std::size_t j = kk + 2; j < n; ++j) vr[j] = a(kk, j);
      apply_reflector_left(vv, kk + 1, vr.data() + kk + 1, tauR[kk], kk + 1, n, false);
    }
    U = Uout;
    V = Vout;
  }

  bidiagonal_qr(d, e, U, V);
  sigma = d;
}

template <Scalar T>
void sort_svd(TopSvd<T>& s) {
  const std::size_t r = s.sigma.size();
  std::vector<std::size_t> ord(r);
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return s.sigma[a] > s.sigma[b]; });
  bool sorted = true;
  for (std::size_t i = 0; i < r; ++i) sorted = sorted && ord[i] == i;
  if (sorted) return;
  TopSvd<T> o;
  o.sigma.resize(r);
  for (std::size_t i = 0; i < r; ++i) o.sigma[i] = s.sigma[ord[i]];
  o.S = s.S.select_cols(ord);
  o.T = s.T.select_cols(ord);
  s = std::move(o);
}

// Extends the columns flagged in `fill` to an orthonormal set.
template <Scalar T>
void complete_orthonormal(ColMajor<T>& U, const std::vector<bool>& fill) {
  const std::size_t m = U.m;
  std::size_t probe = 0;
  for (std::size_t j = 0; j < U.n; ++j) {
    if (!fill[j]) continue;
    for (; probe < m; ++probe) {
      std::vector<T> x(m, T(0));
      x[probe] = T(1);
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t c = 0; c < U.n; ++c) {
          if (c == j || (fill[c] && c > j)) continue;
          T dot(0);
          for (std::size_t i = 0; i < m; ++i) dot += curlra::conj(U(i, c)) * x[i];
          for (std::size_t i = 0; i < m; ++i) x[i] -= dot * U(i, c);
        }
      double nx = 0;
      for (auto& v : x) nx += abs2(v);
      nx = std::sqrt(nx);
      if (nx > 1e-8) {
        for (std::size_t i = 0; i < m; ++i) U(i, j) = x[i] / nx;
        ++probe;
        break;
      }
    }
  }
}

template <Scalar T>
TopSvd<T> svd_jacobi_tall(ColMajor<T> a) {
  const std::size_t m = a.m, n = a.n;
  ColMajor<T> V(n, n);
  for (std::size_t j = 0; j < n; ++j) V(j, j) = T(1);
  bool converged = false;
  for (int sweep = 0; sweep < 80 && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0;
        T gamma(0);
        const T* ap = a.col(p);
        const T* aq = a.col(q);
        for (std::size_t i = 0; i < m; ++i) {
          alpha += abs2(ap[i]);
          beta += abs2(aq[i]);
          gamma += curlra::conj(ap[i]) * aq[i];
        }
        const double g = std::abs(gamma);
        if (g == 0 || g <= kEps * std::sqrt(alpha * beta)) continue;
        converged = false;
        const T phase = gamma / g;  // e^{i phi}
        const double zeta = (beta - alpha) / (2 * g);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
        const double c = 1 / std::sqrt(1 + t * t), s = c * t;
        const T ph = curlra::conj(phase);
        auto rotate = [&](ColMajor<T>& M) {
          T* x = M.col(p);
          T* y = M.col(q);
          for (std::size_t i = 0; i < M.m; ++i) {
            const T xp = x[i], yq = y[i] * ph;
            x[i] = c * xp - s * yq;
            y[i] = s * xp + c * yq;
          }
        };
        rotate(a);
        rotate(V);
      }
  }
  if (!converged) throw NumericalFailure("svd: Jacobi sweeps did not converge");
  TopSvd<T> out;
  out.sigma.resize(n);
  double smax = 0;
  for (std::size_t j = 0; j < n; ++j) {
    double s2 = 0;
    for (std::size_t i = 0; i < m; ++i) s2 += abs2(a(i, j));
    out.sigma[j] = std::sqrt(s2);
    smax = std::max(smax, out.sigma[j]);
  }
  std::vector<bool> fill(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    if (out.sigma[j] <= smax * 1e-300 || out.sigma[j] == 0) {
      fill[j] = true;
      out.sigma[j] = 0;
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) a(i, j) /= out.sigma[j];
  }
  complete_orthonormal(a, fill);
  out.S = a.to_matrix(n);
  out.T = V.to_matrix(n);
  sort_svd(out);
  return out;
}

template <Scalar T>
TopSvd<T> svd_dispatch(const Matrix<T>& W, bool jacobi_only) {
  if (W.rows() == 0 || W.cols() == 0) throw ArgumentError("svd: empty matrix");
  for (const auto& x : W.storage())
    if (!std::isfinite(std::abs(x))) throw NumericalFailure("svd: non-finite entry");
  const bool wide = W.rows() < W.cols();
  ColMajor<T> a = ColMajor<T>::from(W, wide);
  TopSvd<T> out;
  bool done = false;
  if (!jacobi_only) {
    try {
      ColMajor<T> U(0, 0), V(0, 0);
      svd_tall(a, true, out.sigma, &U, &V);
      out.S = U.to_matrix(U.n);
      out.T = V.to_matrix(V.n);
      sort_svd(out);
      done = true;
    } catch (const BidiagFailure&) {
    }
  }
  if (!done) out = svd_jacobi_tall(std::move(a));
  if (wide) std::swap(out.S, out.T);
  return out;
}

template <Scalar T>
void check_square(const Matrix<T>& A, const char* who) {
  if (A.rows() != A.cols()) throw ArgumentError(std::string(who) + ": matrix must be square");
}

}  // namespace

template <Scalar T>
TopSvd<T> svd(const Matrix<T>& W) {
  return svd_dispatch(W, false);
}

template <Scalar T>
TopSvd<T> svd_jacobi(const Matrix<T>& W) {
  return svd_dispatch(W, true);
}

template <Scalar T>
std::vector<double> singular_values(const Matrix<T>& W) {
  if (W.rows() == 0 || W.cols() == 0) throw ArgumentError("singular_values: empty matrix");
  const bool wide = W.rows() < W.cols();
  std::vector<double> s;
  try {
    svd_tall<T>(ColMajor<T>::from(W, wide), false, s, nullptr, nullptr);
  } catch (const BidiagFailure&) {
    return svd_jacobi(W).sigma;
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

template <Scalar T>
TopSvd<T> truncate(const TopSvd<T>& s, std::size_t r) {
  if (r == 0 || r > s.sigma.size()) throw ArgumentError("truncate: rank out of range");
  std::vector<std::size_t> lead(r);
  std::iota(lead.begin(), lead.end(), 0);
  return {s.S.select_cols(lead), std::vector<double>(s.sigma.begin(), s.sigma.begin() + r), s.T.select_cols(lead)};
}

template <Scalar T>
Matrix<T> reconstruct(const TopSvd<T>& s) {
  Matrix<T> SS = s.S;
  for (std::size_t i = 0; i < SS.rows(); ++i)
    for (std::size_t j = 0; j < s.sigma.size(); ++j) SS(i, j) *= s.sigma[j];
  return matmul(SS, s.T.adjoint());
}

template <Scalar T>
double norm(const Matrix<T>& W, NormKind kind) {
  if (W.empty()) throw ArgumentError("norm: empty matrix");
  switch (kind) {
    case NormKind::spectral:
      return singular_values(W)[0];
    case NormKind::frobenius:
      return std::sqrt(frobenius2(W));
    case NormKind::chebyshev: {
      double c = 0;
      for (const auto& x : W.storage()) c = std::max(c, std::abs(x));
      return c;
    }
  }
  return 0;
}

template <Scalar T>
Matrix<T> pinv_of(const TopSvd<T>& s, double rel_tol) {
  const std::size_t m = s.S.rows(), n = s.T.rows();
  Matrix<T> P(n, m);
  if (s.sigma.empty() || s.sigma[0] == 0) return P;
  const double cut = rel_tol * s.sigma[0];
  std::size_t keep = 0;
  while (keep < s.sigma.size() && s.sigma[keep] > cut) ++keep;
  Matrix<T> Ts(n, keep);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < keep; ++j) Ts(i, j) = s.T(i, j) / s.sigma[j];
  std::vector<std::size_t> lead(keep);
  std::iota(lead.begin(), lead.end(), 0);
  return matmul(Ts, s.S.select_cols(lead).adjoint());
}

template <Scalar T>
Matrix<T> pinv(const Matrix<T>& W, double rel_tol) {
  return pinv_of(svd(W), rel_tol);
}

template <Scalar T>
Matrix<T> pinv_truncated(const Matrix<T>& W, std::size_t r, double rel_tol) {
  return pinv_of(truncate(svd(W), r), rel_tol);
}

template <Scalar T>
std::size_t numerical_rank(const Matrix<T>& W, double tol) {
  if (W.empty()) return 0;
  std::size_t c = 0;
  for (double s : singular_values(W)) c += s > tol;
  return c;
}

template <Scalar T>
double log_projective_volume(const Matrix<T>& W, std::size_t r) {
  const auto s = singular_values(W);
  if (r > s.size()) throw ArgumentError("projective_volume: r exceeds min(m, n)");
  double lv = 0;
  for (std::size_t j = 0; j < r; ++j) {
    if (s[j] == 0) return -std::numeric_limits<double>::infinity();
    lv += std::log(s[j]);
  }
  return lv;
}

template <Scalar T>
double log_volume(const Matrix<T>& W) {
  return log_projective_volume(W, std::min(W.rows(), W.cols()));
}

template <Scalar T>
double projective_volume(const Matrix<T>& W, std::size_t r) {
  return std::exp(log_projective_volume(W, r));
}

template <Scalar T>
double volume(const Matrix<T>& W) {
  return std::exp(log_volume(W));
}

template <Scalar T>
bool pinv_product_bound_check(const Matrix<T>& G, const Matrix<T>& Sigma, const Matrix<T>& H) {
  const std::size_t r = Sigma.rows();
  if (Sigma.cols() != r || G.cols() != r || H.rows() != r)
    throw ArgumentError("pinv_product_bound_check: inconsistent shapes");
  auto full_rank = [r](const Matrix<T>& A) {
    const auto s = singular_values(A);
    if (s.size() < r || s[0] == 0) return false;
    return s[r - 1] > 1e-12 * s[0];
  };
  if (!full_rank(G) || !full_rank(Sigma) || !full_rank(H))
    throw ArgumentError("pinv_product_bound_check: factors must have full rank r");
  auto inv_norm = [r](const Matrix<T>& A) { return 1.0 / singular_values(A)[r - 1]; };
  const double lhs = inv_norm(matmul(matmul(G, Sigma), H));
  const double rhs = inv_norm(G) * inv_norm(Sigma) * inv_norm(H);
  return lhs <= rhs * (1 + 1e-10);
}

template <Scalar T>
PivotedQr<T> qr_pivoted(const Matrix<T>& A, std::size_t max_steps) {
  const std::size_t m = A.rows(), n = A.cols();
  const std::size_t p = std::min({m, n, max_steps});
  ColMajor<T> a = ColMajor<T>::from(A, false);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<T> tau(p, T(0));
  std::vector<double> norms(n);
  for (std::size_t k = 0; k < p; ++k) {
    std::size_t best = k;
    double bestv = -1;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0;
      const T* c = a.col(j);
      for (std::size_t i = k; i < m; ++i) s += abs2(c[i]);
      norms[j] = s;
      if (j == k || s > bestv * (1 + 1e-12)) {
        best = j;
        bestv = s;
      }
    }
    if (best != k) {
      std::swap_ranges(a.col(k), a.col(k) + m, a.col(best));
      std::swap(perm[k], perm[best]);
    }
    double beta = 0;
    T* ck = a.col(k) + k;
    tau[k] = householder(ck, m - k, 1, beta);
    const T saved = ck[0];
    ck[0] = T(1);
    apply_reflector_left(a, k, ck, tau[k], k + 1, n, true);
    ck[0] = saved;
    a(k, k) = T(beta);
  }
  PivotedQr<T> out;
  out.perm = perm;
  out.R = Matrix<T>(p, n);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < n; ++j) out.R(i, j) = a(i, j);
  ColMajor<T> q(m, p);
  for (std::size_t j = 0; j < p; ++j) q(j, j) = T(1);
  std::vector<T> v(m);
  for (std::size_t k = p; k-- > 0;) {
    v[k] = T(1);
    for (std::size_t i = k + 1; i < m; ++i) v[i] = a(i, k);
    apply_reflector_left(q, k, v.data() + k, tau[k], k, p, false);
  }
  out.Q = q.to_matrix(p);
  return out;
}

template <Scalar T>
Matrix<T> orthonormal_columns(const Matrix<T>& A) {
  const std::size_t m = A.rows(), n = A.cols();
  if (m < n) throw ArgumentError("orthonormal_columns: needs m >= n");
  ColMajor<T> a = ColMajor<T>::from(A, false);
  std::vector<T> tau(n);
  for (std::size_t k = 0; k < n; ++k) {
    double beta = 0;
    T* ck = a.col(k) + k;
    tau[k] = householder(ck, m - k, 1, beta);
    const T saved = ck[0];
    ck[0] = T(1);
    apply_reflector_left(a, k, ck, tau[k], k + 1, n, true);
    ck[0] = saved;
  }
  ColMajor<T> q(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = T(1);
  std::vector<T> v(m);
  for (std::size_t k = n; k-- > 0;) {
    v[k] = T(1);
    for (std::size_t i = k + 1; i < m; ++i) v[i] = a(i, k);
    apply_reflector_left(q, k, v.data() + k, tau[k], k, n, false);
  }
  return q.to_matrix(n);
}

template <Scalar T>
Lu<T> lu_factor(const Matrix<T>& A) {
  check_square(A, "lu_factor");
  const std::size_t n = A.rows();
  Lu<T> f{A, std::vector<std::size_t>(n), 1, false};
  std::iota(f.piv.begin(), f.piv.end(), 0);
  Matrix<T>& a = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        p = i;
      }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(f.piv[k], f.piv[p]);
      f.sign = -f.sign;
    }
    if (best == 0) {
      f.singular = true;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const T l = a(i, k) / a(k, k);
      a(i, k) = l;
      if (l == T(0)) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
    }
  }
  return f;
}

template <Scalar T>
Matrix<T> lu_solve(const Lu<T>& f, const Matrix<T>& B) {
  const std::size_t n = f.lu.rows();
  if (B.rows() != n) throw ArgumentError("lu_solve: shape mismatch");
  if (f.singular) throw NumericalFailure("lu_solve: singular matrix");
  Matrix<T> X = B.select_rows(f.piv);
  const std::size_t c = B.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < i; ++k) {
      const T l = f.lu(i, k);
      if (l == T(0)) continue;
      for (std::size_t j = 0; j < c; ++j) X(i, j) -= l * X(k, j);
    }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const T u = f.lu(i, k);
      if (u == T(0)) continue;
      for (std::size_t j = 0; j < c; ++j) X(i, j) -= u * X(k, j);
    }
    const T d = f.lu(i, i);
    for (std::size_t j = 0; j < c; ++j) X(i, j) /= d;
  }
  return X;
}

template <Scalar T>
T determinant(const Matrix<T>& A) {
  const auto f = lu_factor(A);
  if (f.singular) return T(0);
  T d(f.sign);
  for (std::size_t i = 0; i < A.rows(); ++i) d *= f.lu(i, i);
  return d;
}

template <Scalar T>
Matrix<T> solve(const Matrix<T>& A, const Matrix<T>& B) {
  return lu_solve(lu_factor(A), B);
}

template <Scalar T>
Matrix<T> inverse(const Matrix<T>& A) {
  return solve(A, Matrix<T>::identity(A.rows()));
}

#define CURLRA_LINALG(T)                                                                      \
  template TopSvd<T> svd(const Matrix<T>&);                                                   \
  template TopSvd<T> svd_jacobi(const Matrix<T>&);                                            \
  template std::vector<double> singular_values(const Matrix<T>&);                             \
  template TopSvd<T> truncate(const TopSvd<T>&, std::size_t);                                 \
  template Matrix<T> reconstruct(const TopSvd<T>&);                                           \
  template double norm(const Matrix<T>&, NormKind);                                           \
  template Matrix<T> pinv(const Matrix<T>&, double);                                          \
  template Matrix<T> pinv_truncated(const Matrix<T>&, std::size_t, double);                   \
  template Matrix<T> pinv_of(const TopSvd<T>&, double);                                       \
  template std::size_t numerical_rank(const Matrix<T>&, double);                              \
  template double volume(const Matrix<T>&);                                                   \
  template double projective_volume(const Matrix<T>&, std::size_t);                           \
  template double log_volume(const Matrix<T>&);                                               \
  template double log_projective_volume(const Matrix<T>&, std::size_t);                       \
  template bool pinv_product_bound_check(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&); \
  template PivotedQr<T> qr_pivoted(const Matrix<T>&, std::size_t);                            \
  template Matrix<T> orthonormal_columns(const Matrix<T>&);                                   \
  template Lu<T> lu_factor(const Matrix<T>&);                                                 \
  template Matrix<T> lu_solve(const Lu<T>&, const Matrix<T>&);                                \
  template T determinant(const Matrix<T>&);                                                   \
  template Matrix<T> solve(const Matrix<T>&, const Matrix<T>&);                               \
  template Matrix<T> inverse(const Matrix<T>&);
CURLRA_LINALG(double)
CURLRA_LINALG(cplx)
#undef CURLRA_LINALG

}  // namespace curlra
