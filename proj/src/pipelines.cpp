#include "curlra/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "curlra/errors.hpp"

namespace curlra {

SubAlg parse_subalg(const std::string& s) {
  if (s == "lu") return SubAlg::lu;
  if (s == "qr") return SubAlg::qr;
  if (s == "dmm08") return SubAlg::dmm08;
  throw ArgumentError("unknown sub-algorithm '" + s + "' (lu|qr|dmm08)");
}

std::string to_string(SubAlg a) {
  switch (a) {
    case SubAlg::lu: return "lu";
    case SubAlg::qr: return "qr";
    case SubAlg::dmm08: return "dmm08";
  }
  return "?";
}

namespace {

// Rank collapse threshold for sketches handed to the selection step.
constexpr double kSketchRankTol = 1e-10;

void check_bounds(std::size_t m, std::size_t n, std::size_t r, std::size_t k, std::size_t l, const char* who) {
  if (!(r > 0 && r <= k && k <= m && r <= l && l <= n))
    throw ArgumentError(std::string(who) + ": need 0 < r <= k <= m and r <= l <= n");
}

// sigma_r of G (0 if G has fewer than r singular values); rel receives sigma_r / sigma_1.
template <Scalar T>
double sigma_r_of(const Matrix<T>& G, std::size_t r, double* rel = nullptr) {
  const auto s = singular_values(G);
  const double v = s.size() >= r ? s[r - 1] : 0.0;
  if (rel) *rel = (s.empty() || s[0] == 0) ? 0.0 : v / s[0];
  return v;
}

template <Scalar T>
bool generator_ok(const Matrix<T>& G, std::size_t r, double& sigma_r) {
  double rel = 0;
  sigma_r = sigma_r_of(G, r, &rel);
  return rel > kSingularGeneratorTol;
}

// r x c matrix whose rows span the dominant r-dimensional row space of A.
template <Scalar T>
Matrix<T> row_space_factor(const Matrix<T>& A, std::size_t r) {
  if (A.rows() == r) return A;
  const auto f = qr_pivoted(A, r);
  Matrix<T> Rp(r, A.cols());
  for (std::size_t j = 0; j < A.cols(); ++j)
    for (std::size_t i = 0; i < r; ++i) Rp(i, f.perm[j]) = f.R(i, j);
  return Rp;
}

std::vector<std::size_t> weighted_distinct(std::vector<double> w, std::size_t count, Rng& rng) {
  std::vector<std::size_t> out;
  std::vector<char> taken(w.size(), 0);
  for (std::size_t t = 0; t < count; ++t) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::size_t pick = w.size();
    if (total > 0) {
      double u = rng.uniform() * total;
      for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] <= 0) continue;
        pick = j;
        if (u < w[j]) break;
        u -= w[j];
      }
    } else {
      for (std::size_t j = 0; j < w.size() && pick == w.size(); ++j)
        if (!taken[j]) pick = j;
    }
    taken[pick] = 1;
    w[pick] = 0;
    out.push_back(pick);
  }
  return out;
}

std::vector<std::size_t> distinct_sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t position_of(const std::vector<std::size_t>& sorted, std::size_t x) {
  return std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
}

std::vector<std::size_t> map_through(const std::vector<std::size_t>& base, const IndexSet& local) {
  std::vector<std::size_t> out;
  out.reserve(local.size());
  for (auto i : local) out.push_back(base[i]);
  return out;
}

// k rows and l columns inside a sketch S, as local indices.
template <Scalar T>
std::optional<std::pair<IndexSet, IndexSet>> pick_generator(const Matrix<T>& S, std::size_t r, std::size_t k,
                                                            std::size_t l, SubAlg alg, Rng& rng) {
  const auto rows = select_columns(S.adjoint(), r, k, alg, rng);
  if (!rows) return std::nullopt;
  const auto cols = select_columns(S.select_rows(rows->indices()), r, l, alg, rng);
  if (!cols) return std::nullopt;
  return std::make_pair(*rows, *cols);
}

void note_attempt(const PipelineOptions& opt, std::size_t a) {
  if (opt.stats) opt.stats->attempts = a;
}

}  // namespace

template <Scalar T>
std::optional<IndexSet> select_columns(const Matrix<T>& A, std::size_t r, std::size_t count, SubAlg alg, Rng& rng) {
  const std::size_t p = A.rows(), c = A.cols();
  if (r == 0 || r > p || count < r || count > c) throw ArgumentError("select_columns: need r <= rows and r <= count <= cols");
  if (count == c) return IndexSet::range(c, c);
  const Matrix<T> Rp = row_space_factor(A, r);
  double rel = 0;
  sigma_r_of(Rp, r, &rel);
  if (rel <= kSketchRankTol) return std::nullopt;

  IndexSet base;
  switch (alg) {
    case SubAlg::lu:
      base = lup_ca(Rp).selected;
      break;
    case SubAlg::qr:
      base = rrqr_select_columns(A, r);
      break;
    case SubAlg::dmm08: {
      const auto s = truncate(svd(A), r);
      const auto scores = leverage_scores_from_basis(s.T, 1.0);
      return IndexSet::from_unsorted(weighted_distinct(scores.p, count, rng), c);
    }
  }
  if (count == r) return base;
  return greedy_grow_wide(Rp, base, count).selected;
}

template <Scalar T>
CurLra<T> primitive_cur(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l, Rng& rng,
                        const PipelineOptions& opt) {
  const std::size_t m = W.rows(), n = W.cols();
  check_bounds(m, n, r, k, l, "primitive_cur");
  double last = 0;
  for (int a = 1; a <= opt.max_attempts; ++a) {
    note_attempt(opt, a);
    const IndexSet I(rng.sample_without_replacement(m, k), m), J(rng.sample_without_replacement(n, l), n);
    const Matrix<T> G = W.block(I.indices(), J.indices());
    if (!generator_ok(G, r, last)) continue;
    return make_cur(I, J, G, r, m, n);
  }
  throw UnluckySampling("primitive_cur: every sampled generator was rank deficient", opt.max_attempts, last);
}

template <Scalar T>
CurLra<T> cynical_cur(EntrySource<T>& W, std::size_t r, std::size_t q, std::size_t s, std::size_t k, std::size_t l,
                      Rng& rng, const PipelineOptions& opt) {
  const std::size_t m = W.rows(), n = W.cols();
  check_bounds(m, n, r, k, l, "cynical_cur");
  if (q < k || q > m || s < l || s > n) throw ArgumentError("cynical_cur: need k <= q <= m and l <= s <= n");
  double last = 0;
  for (int a = 1; a <= opt.max_attempts; ++a) {
    note_attempt(opt, a);
    const auto K = rng.sample_without_replacement(m, q), L = rng.sample_without_replacement(n, s);
    const Matrix<T> S = W.block(K, L);
    const auto pick = pick_generator(S, r, k, l, opt.subalg, rng);
    if (!pick) continue;
    const Matrix<T> G = S.block(pick->first.indices(), pick->second.indices());
    if (!generator_ok(G, r, last)) continue;
    const auto I = IndexSet::from_unsorted(map_through(K, pick->first), m);
    const auto J = IndexSet::from_unsorted(map_through(L, pick->second), n);
    // K and L are sorted, so the mapped sets keep the generator's row/column order.
    return make_cur(I, J, G, r, m, n);
  }
  throw UnluckySampling("cynical_cur: every sketch was rank deficient", opt.max_attempts, last);
}

template <Scalar T>
CurLra<T> cynical_ca_cur(EntrySource<T>& W, std::size_t r, std::size_t q, std::size_t s, std::size_t k,
                         std::size_t l, Rng& rng, const PipelineOptions& opt) {
  const std::size_t m = W.rows(), n = W.cols();
  check_bounds(m, n, r, k, l, "cynical_ca_cur");
  if (q < k || q > m || s < l || s > n) throw ArgumentError("cynical_ca_cur: need k <= q <= m and l <= s <= n");
  double last = 0;
  for (int a = 1; a <= opt.max_attempts; ++a) {
    note_attempt(opt, a);
    const auto L = rng.sample_without_replacement(n, s);
    const Matrix<T> V = W.cols_of(L);
    const auto Kq = select_columns(V.adjoint(), r, q, opt.subalg, rng);
    if (!Kq) continue;
    const Matrix<T> H = W.rows_of(Kq->indices());
    const auto Ls = select_columns(H, r, s, opt.subalg, rng);
    if (!Ls) continue;
    const Matrix<T> S = H.select_cols(Ls->indices());
    const auto pick = pick_generator(S, r, k, l, opt.subalg, rng);
    if (!pick) continue;
    const Matrix<T> G = S.block(pick->first.indices(), pick->second.indices());
    if (!generator_ok(G, r, last)) continue;
    const auto I = IndexSet::from_unsorted(map_through(Kq->indices(), pick->first), m);
    const auto J = IndexSet::from_unsorted(map_through(Ls->indices(), pick->second), n);
    return make_cur(I, J, G, r, m, n);
  }
  throw UnluckySampling("cynical_ca_cur: every sketch was rank deficient", opt.max_attempts, last);
}

template <Scalar T>
CurLra<T> cross_approximation(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l, std::size_t loops,
                              Rng& rng, const PipelineOptions& opt) {
  const std::size_t m = W.rows(), n = W.cols();
  check_bounds(m, n, r, k, l, "cross_approximation");
  if (loops == 0) throw ArgumentError("cross_approximation: loops must be >= 1");
  IndexSet I(rng.sample_without_replacement(m, k), m), J;
  std::optional<std::pair<IndexSet, IndexSet>> good;
  Matrix<T> V_good;
  std::size_t reseeds = 0, run = 0;
  for (std::size_t t = 0; t < loops; ++t) {
    ++run;
    const Matrix<T> H = W.rows_of(I.indices());
    const auto Jn = select_columns(H, r, l, opt.subalg, rng);
    std::optional<IndexSet> In;
    Matrix<T> V;
    if (Jn) {
      V = W.cols_of(Jn->indices());
      In = select_columns(V.adjoint(), r, k, opt.subalg, rng);
    }
    if (!In) {
      // Rank collapse: start over from a fresh random row set.
      ++reseeds;
      I = IndexSet(rng.sample_without_replacement(m, k), m);
      continue;
    }
    const bool fixed = *In == I && *Jn == J;
    I = *In;
    J = *Jn;
    good = std::make_pair(I, J);
    V_good = std::move(V);
    if (fixed) break;
  }
  if (opt.stats) {
    opt.stats->reseeds = reseeds;
    opt.stats->loops = run;
    opt.stats->attempts = 1;
  }
  if (!good) throw UnluckySampling("cross_approximation: every sketch collapsed below rank r", int(run), 0.0);
  const Matrix<T> G = V_good.select_rows(good->first.indices());
  double sr = 0;
  if (!generator_ok(G, r, sr)) throw UnluckySampling("cross_approximation: final generator is rank deficient", int(run), sr);
  return make_cur(good->first, good->second, G, r, m, n);
}

template <Scalar T>
LeverageScores leverage_scores_from_basis(const Matrix<T>& V, double beta) {
  if (!(beta > 0 && beta <= 1)) throw ArgumentError("leverage scores: beta must lie in (0, 1]");
  const std::size_t n = V.rows(), r = V.cols();
  if (r == 0 || r > n) throw ArgumentError("leverage scores: basis must be n x r with 0 < r <= n");
  const Matrix<T> G = matmul_adj(V, V);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j)
      if (std::abs(G(i, j) - T(i == j ? 1 : 0)) > 1e-8) throw ArgumentError("leverage scores: columns are not orthonormal");
  LeverageScores s;
  s.beta = beta;
  s.p.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double v = 0;
    for (std::size_t i = 0; i < r; ++i) v += abs2(V(j, i));
    s.p[j] = beta * v / double(r) + (1 - beta) / double(n);
  }
  return s;
}

LeverageScores uniform_scores(std::size_t n) {
  if (n == 0) throw ArgumentError("uniform_scores: n must be positive");
  return {std::vector<double>(n, 1.0 / double(n)), 1.0};
}

namespace {

void check_scores(const LeverageScores& s) {
  if (s.p.empty()) throw ArgumentError("sampling: empty score vector");
  double t = 0;
  for (double p : s.p) {
    if (!(p >= 0)) throw ArgumentError("sampling: negative score");
    t += p;
  }
  if (std::abs(t - 1) > 1e-9) throw ArgumentError("sampling: scores must sum to 1");
}

}  // namespace

SamplingPair sample_exactly_l(const LeverageScores& s, std::size_t l, Rng& rng) {
  check_scores(s);
  if (l == 0) throw ArgumentError("sample_exactly_l: l must be positive");
  std::vector<double> cum(s.p.size());
  std::partial_sum(s.p.begin(), s.p.end(), cum.begin());
  SamplingPair out;
  for (std::size_t t = 0; t < l; ++t) {
    const double u = rng.uniform() * cum.back();
    std::size_t i = std::upper_bound(cum.begin(), cum.end(), u) - cum.begin();
    if (i == cum.size()) i = cum.size() - 1;
    while (s.p[i] == 0) --i;  // only reachable through rounding at the top end
    out.indices.push_back(i);
    out.rescale.push_back(1 / std::sqrt(double(l) * s.p[i]));
  }
  return out;
}

SamplingPair sample_expected_l(const LeverageScores& s, std::size_t l, Rng& rng) {
  check_scores(s);
  if (l == 0) throw ArgumentError("sample_expected_l: l must be positive");
  SamplingPair out;
  for (std::size_t j = 0; j < s.p.size(); ++j) {
    const double lp = double(l) * s.p[j];
    if (rng.uniform() < std::min(1.0, lp)) {
      out.indices.push_back(j);
      out.rescale.push_back(1 / std::min(1.0, std::sqrt(lp)));
    }
  }
  return out;
}

namespace {

SamplingPair draw(const LeverageScores& s, std::size_t count, Sampler how, Rng& rng) {
  return how == Sampler::exactly_l ? sample_exactly_l(s, count, rng) : sample_expected_l(s, count, rng);
}

}  // namespace

template <Scalar T>
CurLra<T> cur_via_leverage(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l, Rng& rng,
                           const LeverageOptions& opt) {
  check_bounds(W.rows(), W.cols(), r, k, l, "cur_via_leverage");
  if (opt.scores == ScoreMode::uniform) return cur_via_leverage_scores(W, r, k, l, uniform_scores(W.cols()), rng, opt);
  // Column scores need the top right singular space of all of W (not sublinear).
  const auto top = truncate(svd(W.dense()), r);
  return cur_via_leverage_scores(W, r, k, l, leverage_scores_from_basis(top.T, opt.beta), rng, opt);
}

template <Scalar T>
CurLra<T> cur_via_leverage_scores(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l,
                                  const LeverageScores& column_scores, Rng& rng, const LeverageOptions& opt) {
  const std::size_t m = W.rows(), n = W.cols();
  check_bounds(m, n, r, k, l, "cur_via_leverage");
  if (column_scores.p.size() != n) throw ArgumentError("cur_via_leverage: column scores must have length n");
  double last = 0;
  for (int a = 1; a <= opt.max_attempts; ++a) {
    note_attempt(opt, a);
    const auto cs = draw(column_scores, l, opt.sampler, rng);
    const auto J = distinct_sorted(cs.indices);
    if (J.size() < r) continue;

    LeverageScores row_scores;
    std::optional<Matrix<T>> C;
    if (opt.scores == ScoreMode::uniform) {
      row_scores = uniform_scores(m);
    } else {
      // Row scores from the rescaled column sample C D.
      C = W.cols_of(J);
      Matrix<T> CD(m, cs.indices.size());
      for (std::size_t t = 0; t < cs.indices.size(); ++t) {
        const std::size_t c = position_of(J, cs.indices[t]);
        for (std::size_t i = 0; i < m; ++i) CD(i, t) = (*C)(i, c) * cs.rescale[t];
      }
      double rel = 0;
      sigma_r_of(CD, r, &rel);
      if (rel <= kSketchRankTol) continue;
      row_scores = leverage_scores_from_basis(truncate(svd(CD), r).S, opt.beta_bar);
    }
    const auto rs = draw(row_scores, k, opt.sampler, rng);
    const auto I = distinct_sorted(rs.indices);
    if (I.size() < r) continue;

    const Matrix<T> G = C ? C->select_rows(I) : W.block(I, J);
    if (!generator_ok(G, r, last)) continue;

    CurLra<T> cur;
    cur.I = IndexSet(I, m);
    cur.J = IndexSet(J, n);
    cur.r = r;
    cur.m = m;
    cur.n = n;
    if (opt.simple_nucleus) {
      cur.U = canonical_nucleus(G, r);
    } else {
      // M = D-bar S-bar^T W S D over the draws (repeats included), U' = D M^+ D-bar,
      // then folded onto the distinct index sets.
      const std::size_t ks = rs.indices.size(), ls = cs.indices.size();
      Matrix<T> M(ks, ls);
      for (std::size_t a2 = 0; a2 < ks; ++a2)
        for (std::size_t t = 0; t < ls; ++t)
          M(a2, t) = rs.rescale[a2] * G(position_of(I, rs.indices[a2]), position_of(J, cs.indices[t])) * cs.rescale[t];
      const Matrix<T> Mp = pinv_truncated(M, r);
      cur.U = Matrix<T>(J.size(), I.size());
      for (std::size_t t = 0; t < ls; ++t)
        for (std::size_t a2 = 0; a2 < ks; ++a2)
          cur.U(position_of(J, cs.indices[t]), position_of(I, rs.indices[a2])) +=
              cs.rescale[t] * Mp(t, a2) * rs.rescale[a2];
    }
    cur.validate();
    return cur;
  }
  throw UnluckySampling("cur_via_leverage: every sampled generator was rank deficient", opt.max_attempts, last);
}

template <Scalar T>
TopSvd<T> lra_to_top_svd(const Matrix<T>& A, const Matrix<T>& V, const Matrix<T>& B, std::size_t r) {
  if (A.cols() != V.rows() || V.cols() != B.rows()) throw ArgumentError("lra_to_top_svd: inconsistent factor shapes");
  if (r == 0) throw ArgumentError("lra_to_top_svd: r must be positive");
  if (r > std::min(V.rows(), V.cols()))
    throw RankMismatch("lra_to_top_svd: r exceeds the inner dimensions", r, std::min(V.rows(), V.cols()));
  // A = Qa Ra, B^H = Qb Rb with the pivoting folded back into Ra and Rb.
  const auto fa = qr_pivoted(A);
  const auto fb = qr_pivoted(B.adjoint());
  auto unpivot = [](const PivotedQr<T>& f) {
    Matrix<T> R(f.R.rows(), f.R.cols());
    for (std::size_t j = 0; j < f.R.cols(); ++j)
      for (std::size_t i = 0; i < f.R.rows(); ++i) R(i, f.perm[j]) = f.R(i, j);
    return R;
  };
  const Matrix<T> core = matmul(matmul(unpivot(fa), V), unpivot(fb).adjoint());
  const auto s = svd(core);
  std::size_t found = 0;
  for (double v : s.sigma) found += v > kSingularGeneratorTol * s.sigma[0];
  if (s.sigma.empty() || s.sigma[0] == 0) found = 0;
  if (found < r) throw RankMismatch("lra_to_top_svd: the LRA has lower rank than r", r, found);
  const auto t = truncate(s, r);
  return {matmul(fa.Q, t.S), t.sigma, matmul(fb.Q, t.T)};
}

template <Scalar T>
CurLra<T> top_svd_to_cur(EntrySource<T>& W, const TopSvd<T>& s, std::size_t k, std::size_t l, SvdCurMode mode,
                         Rng& rng, const PipelineOptions& opt) {
  const std::size_t m = W.rows(), n = W.cols(), r = s.rank();
  if (s.S.rows() != m || s.T.rows() != n) throw ArgumentError("top_svd_to_cur: SVD factors do not match W");
  check_bounds(m, n, r, k, l, "top_svd_to_cur");
  if (mode == SvdCurMode::deterministic) {
    note_attempt(opt, 1);
    const auto I = select_columns(s.S.adjoint(), r, k, SubAlg::qr, rng);
    const auto J = select_columns(s.T.adjoint(), r, l, SubAlg::qr, rng);
    if (!I || !J) throw RankMismatch("top_svd_to_cur: singular factors are rank deficient", r, 0);
    return make_cur(*I, *J, W.block(I->indices(), J->indices()), r, m, n);
  }
  const auto ps = leverage_scores_from_basis(s.S), pt = leverage_scores_from_basis(s.T);
  double last = 0;
  for (int a = 1; a <= opt.max_attempts; ++a) {
    note_attempt(opt, a);
    const auto I = distinct_sorted(sample_exactly_l(ps, k, rng).indices);
    const auto J = distinct_sorted(sample_exactly_l(pt, l, rng).indices);
    if (I.size() < r || J.size() < r) continue;
    const Matrix<T> G = W.block(I, J);
    if (!generator_ok(G, r, last)) continue;
    return make_cur(IndexSet(I, m), IndexSet(J, n), G, r, m, n);
  }
  throw UnluckySampling("top_svd_to_cur: every sampled generator was rank deficient", opt.max_attempts, last);
}

double svd_cur_nucleus_bound(std::size_t m, std::size_t n, std::size_t k, std::size_t l, double h, double sigma_r) {
  return rrqr_certificate(m, l, h) * rrqr_certificate(n, k, h) / sigma_r;
}

template <Scalar T>
CurLra<T> refine_lra(EntrySource<T>& W, const Matrix<T>& A, const Matrix<T>& B, std::size_t r, std::size_t k,
                     std::size_t l, Rng& rng, const LeverageOptions& opt) {
  if (A.rows() != W.rows() || B.cols() != W.cols()) throw ArgumentError("refine_lra: crude factors do not match W");
  const auto s = lra_to_top_svd(A, Matrix<T>::identity(A.cols()), B, r);
  return cur_via_leverage_scores(W, r, k, l, leverage_scores_from_basis(s.T, opt.beta), rng, opt);
}

void PipelineSpec::resolve(std::size_t m, std::size_t n) {
  if (r == 0) throw ArgumentError("pipeline.r: must be positive");
  if (k == 0) k = r;
  if (l == 0) l = r;
  if (q == 0) q = std::min(m, std::max(k, 4 * r));
  if (s == 0) s = std::min(n, std::max(l, 4 * r));
  if (!(r <= k && k <= q && q <= m)) throw ArgumentError("pipeline: need r <= k <= q <= m");
  if (!(r <= l && l <= s && s <= n)) throw ArgumentError("pipeline: need r <= l <= s <= n");
  if (loops == 0) throw ArgumentError("pipeline.loops: must be >= 1");
  if (max_attempts < 1) throw ArgumentError("pipeline.max_attempts: must be >= 1");
}

template <Scalar T>
CurLra<T> run_pipeline(const PipelineSpec& spec0, EntrySource<T>& W, Rng& rng, PipelineStats* stats) {
  PipelineSpec p = spec0;
  p.resolve(W.rows(), W.cols());
  PipelineOptions base;
  base.subalg = p.subalg;
  base.max_attempts = p.max_attempts;
  base.stats = stats;
  if (p.variant == "primitive") return primitive_cur(W, p.r, p.k, p.l, rng, base);
  if (p.variant == "cynical") return cynical_cur(W, p.r, p.q, p.s, p.k, p.l, rng, base);
  if (p.variant == "cynical_ca") return cynical_ca_cur(W, p.r, p.q, p.s, p.k, p.l, rng, base);
  if (p.variant == "cross_approx") return cross_approximation(W, p.r, p.k, p.l, p.loops, rng, base);
  if (p.variant == "leverage") {
    LeverageOptions lo;
    static_cast<PipelineOptions&>(lo) = base;
    lo.sampler = p.sampler;
    lo.scores = p.scores;
    lo.beta = p.beta;
    lo.beta_bar = p.beta_bar;
    lo.simple_nucleus = p.simple_nucleus;
    return cur_via_leverage(W, p.r, p.k, p.l, rng, lo);
  }
  if (p.variant == "svd_to_cur") {
    // Superfast crude LRA (C-A), its top SVD, then the SVD-guided CUR.
    const auto crude = cross_approximation(W, p.r, p.k, p.l, p.loops, rng, base);
    const Matrix<T> C = W.cols_of(crude.J.indices()), R = W.rows_of(crude.I.indices());
    const auto top = lra_to_top_svd(C, crude.U, R, p.r);
    return top_svd_to_cur(W, top, p.k, p.l, p.svd_mode, rng, base);
  }
  throw ArgumentError("pipeline.variant: unknown '" + p.variant + "'");
}

#define CURLRA_PIPELINES(T)                                                                                         \
  template std::optional<IndexSet> select_columns(const Matrix<T>&, std::size_t, std::size_t, SubAlg, Rng&);        \
  template CurLra<T> primitive_cur(EntrySource<T>&, std::size_t, std::size_t, std::size_t, Rng&,                    \
                                   const PipelineOptions&);                                                         \
  template CurLra<T> cynical_cur(EntrySource<T>&, std::size_t, std::size_t, std::size_t, std::size_t, std::size_t,  \
                                 Rng&, const PipelineOptions&);                                                     \
  template CurLra<T> cynical_ca_cur(EntrySource<T>&, std::size_t, std::size_t, std::size_t, std::size_t,            \
                                    std::size_t, Rng&, const PipelineOptions&);                                     \
  template CurLra<T> cross_approximation(EntrySource<T>&, std::size_t, std::size_t, std::size_t, std::size_t, Rng&, \
                                         const PipelineOptions&);                                                   \
  template LeverageScores leverage_scores_from_basis(const Matrix<T>&, double);                                     \
  template CurLra<T> cur_via_leverage(EntrySource<T>&, std::size_t, std::size_t, std::size_t, Rng&,                 \
                                      const LeverageOptions&);                                                      \
  template CurLra<T> cur_via_leverage_scores(EntrySource<T>&, std::size_t, std::size_t, std::size_t,                \
                                             const LeverageScores&, Rng&, const LeverageOptions&);                  \
  template TopSvd<T> lra_to_top_svd(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, std::size_t);             \
  template CurLra<T> top_svd_to_cur(EntrySource<T>&, const TopSvd<T>&, std::size_t, std::size_t, SvdCurMode, Rng&,  \
                                    const PipelineOptions&);                                                        \
  template CurLra<T> refine_lra(EntrySource<T>&, const Matrix<T>&, const Matrix<T>&, std::size_t, std::size_t,      \
                                std::size_t, Rng&, const LeverageOptions&);                                         \
  template CurLra<T> run_pipeline(const PipelineSpec&, EntrySource<T>&, Rng&, PipelineStats*);
CURLRA_PIPELINES(double)
CURLRA_PIPELINES(cplx)
#undef CURLRA_PIPELINES

}  // namespace curlra
