#include "curlra/maxvol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "curlra/errors.hpp"

namespace curlra {

namespace {

constexpr double kTieSlack = 1e-12;

template <Scalar T>
bool nonsingular(const Matrix<T>& B) {
  const auto s = singular_values(B);
  return !s.empty() && s[0] > 0 && s.back() > 1e-13 * s[0];
}

// Column order of Gaussian elimination with complete pivoting, `steps` steps.
template <Scalar T>
std::vector<std::size_t> complete_pivot_columns(Matrix<T> M, std::size_t steps) {
  const std::size_t m = M.rows(), n = M.cols();
  std::vector<std::size_t> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  for (std::size_t s = 0; s < steps; ++s) {
    std::size_t bi = s, bj = s;
    double best = -1;
    for (std::size_t i = s; i < m; ++i)
      for (std::size_t j = s; j < n; ++j) {
        const double v = std::abs(M(i, j));
        if (v > best * (1 + kTieSlack)) best = v, bi = i, bj = j;
      }
    if (bi != s)
      for (std::size_t j = 0; j < n; ++j) std::swap(M(s, j), M(bi, j));
    if (bj != s) {
      for (std::size_t i = 0; i < m; ++i) std::swap(M(i, s), M(i, bj));
      std::swap(cols[s], cols[bj]);
    }
    if (best == 0) continue;
    const T p = M(s, s);
    for (std::size_t i = s + 1; i < m; ++i) {
      const T f = M(i, s) / p;
      if (f == T(0)) continue;
      for (std::size_t j = s; j < n; ++j) M(i, j) -= f * M(s, j);
    }
  }
  cols.resize(steps);
  return cols;
}

}  // namespace

template <Scalar T>
MaxvolResult dominant_submatrix(const Matrix<T>& A, const IndexSet& start, const MaxvolOptions& opt) {
  const std::size_t r = A.rows(), n = A.cols();
  if (start.size() != r || start.bound() != n) throw ArgumentError("dominant_submatrix: start must hold r columns of A");
  std::vector<std::size_t> pos = start.indices();
  if (!nonsingular(A.select_cols(pos))) throw ArgumentError("dominant_submatrix: singular start block");
  const std::size_t max_iter = opt.max_iter ? opt.max_iter : 10 * n * r;

  MaxvolResult res;
  Matrix<T> C = solve(A.select_cols(pos), A);
  std::size_t since_refresh = 0;
  for (;;) {
    std::size_t bi = 0, bj = 0;
    double best = -1;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double v = std::abs(C(i, j));
        if (v > best * (1 + kTieSlack)) best = v, bi = i, bj = j;
      }
    res.certificate = best;
    if (best <= 1 + opt.swap_tol) break;
    if (res.iterations == max_iter) {
      res.capped = true;
      break;
    }
    // Replacing column pos[bi] by bj scales the volume by |c_ij|.
    std::vector<T> c(r), row(C.row(bi).begin(), C.row(bi).end());
    for (std::size_t i = 0; i < r; ++i) c[i] = C(i, bj);
    const T piv = c[bi];
    c[bi] -= T(1);
    for (std::size_t i = 0; i < r; ++i) {
      if (c[i] == T(0)) continue;
      const T f = c[i] / piv;
      for (std::size_t j = 0; j < n; ++j) C(i, j) -= f * row[j];
    }
    pos[bi] = bj;
    res.swap_log_gain.push_back(std::log(best));
    ++res.iterations;
    if (++since_refresh == r) {
      C = solve(A.select_cols(pos), A);
      since_refresh = 0;
    }
  }
  res.selected = IndexSet::from_unsorted(pos, n);
  res.log_volume = log_volume(A.select_cols(res.selected.indices()));
  return res;
}

template <Scalar T>
IndexSet lup_init(const Matrix<T>& A) {
  return IndexSet::from_unsorted(complete_pivot_columns(A, A.rows()), A.cols());
}

template <Scalar T>
MaxvolResult lup_ca(const Matrix<T>& A, const MaxvolOptions& opt) {
  const std::size_t r = A.rows();
  if (r == 0 || r > A.cols()) throw ArgumentError("lup_ca: need 0 < r <= n");
  const auto s = singular_values(A);
  if (s[0] == 0 || s[r - 1] <= 1e-10 * s[0]) throw ArgumentError("lup_ca: input is rank deficient");
  return dominant_submatrix(A, lup_init(A), opt);
}

template <Scalar T>
GreedyResult greedy_grow_tall(const Matrix<T>& W, std::size_t q) {
  const std::size_t r = W.rows(), n = W.cols();
  if (q == 0 || q > r || r > n) throw ArgumentError("greedy_grow_tall: need 0 < q <= r <= n");
  // Householder QR with column pivoting is exactly the greedy residual-norm rule.
  const auto f = qr_pivoted(W, q);
  GreedyResult g;
  g.order.assign(f.perm.begin(), f.perm.begin() + q);
  const double lead = std::abs(f.R(0, 0));
  for (std::size_t s = 0; s < q; ++s) {
    const double d = std::abs(f.R(s, s));
    if (d <= 1e-13 * lead || lead == 0) g.degenerate = true;
    g.log_volume += std::log(d);
  }
  g.selected = IndexSet::from_unsorted(g.order, n);
  return g;
}

template <Scalar T>
GreedyResult greedy_grow_wide(const Matrix<T>& W, const IndexSet& start, std::size_t q) {
  const std::size_t r = W.rows(), n = W.cols();
  if (start.size() != r || start.bound() != n) throw ArgumentError("greedy_grow_wide: start must hold r columns");
  if (q <= r || q > n) throw ArgumentError("greedy_grow_wide: need r < q <= n");
  const Matrix<T> B = W.select_cols(start.indices());
  if (!nonsingular(B)) throw ArgumentError("greedy_grow_wide: singular start block");

  GreedyResult g;
  g.order = start.indices();
  g.log_volume = log_volume(B);
  // Y = G W with G^H G = (A A^H)^-1 for the current selection A; the volume
  // gain of column j is 1 + |Y[:, j]|^2.
  Matrix<T> Y = solve(B, W);
  std::vector<char> taken(n, 0);
  for (auto j : start) taken[j] = 1;
  std::vector<T> y(r), w(n);
  while (g.order.size() < q) {
    std::size_t bj = n;
    double best = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      double s = 0;
      for (std::size_t i = 0; i < r; ++i) s += abs2(Y(i, j));
      if (bj == n || s > best * (1 + kTieSlack)) best = s, bj = j;
    }
    if (best <= 1e-14) g.degenerate = true;
    taken[bj] = 1;
    g.order.push_back(bj);
    g.log_volume += 0.5 * std::log1p(best);
    if (best <= 0) continue;
    // Y <- (I + y y^H)^{-1/2} Y.
    for (std::size_t i = 0; i < r; ++i) y[i] = Y(i, bj);
    const double c = (1 - 1 / std::sqrt(1 + best)) / best;
    std::fill(w.begin(), w.end(), T(0));
    for (std::size_t i = 0; i < r; ++i) {
      const T yi = conj(y[i]);
      const auto row = Y.row(i);
      for (std::size_t j = 0; j < n; ++j) w[j] += yi * row[j];
    }
    for (std::size_t i = 0; i < r; ++i) {
      const T f = c * y[i];
      auto row = Y.row(i);
      for (std::size_t j = 0; j < n; ++j) row[j] -= f * w[j];
    }
  }
  g.selected = IndexSet::from_unsorted(g.order, n);
  return g;
}

template <Scalar T>
GreedyResult greedy_contract(const Matrix<T>& W, const IndexSet& set, std::size_t p) {
  const std::size_t r = W.rows();
  if (set.bound() != W.cols()) throw ArgumentError("greedy_contract: set does not index W's columns");
  if (p == 0 || p > set.size()) throw ArgumentError("greedy_contract: need 0 < p <= |set|");
  std::vector<std::size_t> cur = set.indices();
  GreedyResult g;
  while (cur.size() > p) {
    const Matrix<T> A = W.select_cols(cur);
    const Matrix<T> P = pinv(A);  // |cur| x r
    std::size_t drop = 0;
    if (cur.size() > r) {
      // Wide: removing b scales v_2^2 by 1 - b^H (A A^H)^-1 b = 1 - (A^+ A)_jj.
      double best = 2;
      for (std::size_t j = 0; j < cur.size(); ++j) {
        T d = 0;
        for (std::size_t i = 0; i < r; ++i) d += P(j, i) * A(i, j);
        const double lev = real_part(d);
        if (lev < best * (1 - kTieSlack)) best = lev, drop = j;
      }
      if (best >= 1 - 1e-14) g.degenerate = true;
    } else {
      // Tall: removing a_j divides the volume by its distance 1/|row j of A^+| to the rest.
      double best = -1;
      for (std::size_t j = 0; j < cur.size(); ++j) {
        double s = 0;
        for (std::size_t i = 0; i < r; ++i) s += abs2(P(j, i));
        if (s > best * (1 + kTieSlack)) best = s, drop = j;
      }
      if (best == 0) g.degenerate = true;
    }
    g.order.push_back(cur[drop]);
    cur.erase(cur.begin() + drop);
  }
  g.selected = IndexSet::from_unsorted(cur, W.cols());
  g.log_volume = log_volume(W.select_cols(g.selected.indices()));
  return g;
}

template <Scalar T>
IndexSet projective_maxvol(const Matrix<T>& W, std::size_t r, std::size_t l, double rank_tol) {
  const std::size_t k = W.rows(), n = W.cols();
  if (r == 0 || r > k || r > l || l > n) throw ArgumentError("projective_maxvol: need r <= k and r <= l <= n");
  const auto s = singular_values(W);
  std::size_t nr = 0;
  for (double v : s) nr += v > rank_tol * s[0];
  if (nr != r) throw RankMismatch("projective_maxvol: numerical rank differs from r", r, nr);

  // Rows of R' span the row space of W, so volumes of its r x l column sets
  // are the r-projective volumes of W's.
  Matrix<T> Rp;
  if (k == r) {
    Rp = W;
  } else {
    const auto f = qr_pivoted(W, r);
    Rp = Matrix<T>(r, n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < r; ++i) Rp(i, f.perm[j]) = f.R(i, j);
  }
  const auto base = lup_ca(Rp);
  if (l == r) return base.selected;
  return greedy_grow_wide(Rp, base.selected, l).selected;
}

double rrqr_certificate(std::size_t p, std::size_t r, double h) {
  return std::sqrt(double(p - r) * double(r) * h * h + 1);
}

namespace {

// Strong rank-revealing column selection on A (Gu-Eisenstat swap rule with
// f = h): swap S_i with j while |X_ij|^2 + (gamma_j omega_i)^2 > h^2, where
// X = A_S^+ A_N, gamma_j is the residual norm of column j off span(A_S), and
// omega_i the norm of row i of A_S^+.
template <Scalar T>
IndexSet strong_columns(const Matrix<T>& A, std::size_t r, const RrqrOptions& opt) {
  const std::size_t n = A.cols();
  if (r == 0 || r > std::min(A.rows(), n)) throw ArgumentError("rrqr_select: need 0 < r <= min(m, l)");
  if (opt.h < 1) throw ArgumentError("rrqr_select: h must be >= 1");
  if (r == n) return IndexSet::range(n, n);
  std::vector<std::size_t> S;
  if (opt.backend == RrqrBackend::qr) {
    const auto f = qr_pivoted(A, r);
    S.assign(f.perm.begin(), f.perm.begin() + r);
  } else {
    S = complete_pivot_columns(A, r);
  }
  std::vector<std::size_t> N;
  {
    std::vector<char> in(n, 0);
    for (auto j : S) in[j] = 1;
    for (std::size_t j = 0; j < n; ++j)
      if (!in[j]) N.push_back(j);
  }
  const double h2 = opt.h * opt.h;
  for (std::size_t swaps = 0; swaps < opt.max_swaps; ++swaps) {
    const Matrix<T> AS = A.select_cols(S), AN = A.select_cols(N);
    const Matrix<T> P = pinv(AS);
    const Matrix<T> X = matmul(P, AN);
    const Matrix<T> Res = AN - matmul(AS, X);
    std::vector<double> gamma2(N.size(), 0), omega2(r, 0);
    for (std::size_t i = 0; i < Res.rows(); ++i)
      for (std::size_t j = 0; j < N.size(); ++j) gamma2[j] += abs2(Res(i, j));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < P.cols(); ++j) omega2[i] += abs2(P(i, j));
    double best = h2 * (1 + kTieSlack);
    std::size_t bi = r, bj = 0;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < N.size(); ++j) {
        const double v = abs2(X(i, j)) + gamma2[j] * omega2[i];
        if (v > best) best = v, bi = i, bj = j;
      }
    if (bi == r) break;
    std::swap(S[bi], N[bj]);
  }
  return IndexSet::from_unsorted(S, n);
}

}  // namespace

template <Scalar T>
IndexSet rrqr_select(const Matrix<T>& W, std::size_t r, const RrqrOptions& opt) {
  return strong_columns(W.adjoint(), r, opt);
}

template <Scalar T>
IndexSet rrqr_select_columns(const Matrix<T>& W, std::size_t r, const RrqrOptions& opt) {
  return strong_columns(W, r, opt);
}

#define CURLRA_MAXVOL(T)                                                                          \
  template MaxvolResult dominant_submatrix(const Matrix<T>&, const IndexSet&, const MaxvolOptions&); \
  template IndexSet lup_init(const Matrix<T>&);                                                   \
  template MaxvolResult lup_ca(const Matrix<T>&, const MaxvolOptions&);                           \
  template GreedyResult greedy_grow_tall(const Matrix<T>&, std::size_t);                          \
  template GreedyResult greedy_grow_wide(const Matrix<T>&, const IndexSet&, std::size_t);         \
  template GreedyResult greedy_contract(const Matrix<T>&, const IndexSet&, std::size_t);          \
  template IndexSet projective_maxvol(const Matrix<T>&, std::size_t, std::size_t, double);        \
  template IndexSet rrqr_select(const Matrix<T>&, std::size_t, const RrqrOptions&);               \
  template IndexSet rrqr_select_columns(const Matrix<T>&, std::size_t, const RrqrOptions&);
CURLRA_MAXVOL(double)
CURLRA_MAXVOL(cplx)
#undef CURLRA_MAXVOL

}  // namespace curlra
