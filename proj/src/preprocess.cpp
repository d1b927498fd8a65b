#include "curlra/preprocess.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "curlra/kernels.hpp"
#include "curlra/linalg.hpp"

namespace curlra {

MultiplierKind parse_multiplier_kind(const std::string& s) {
  if (s == "gaussian") return MultiplierKind::gaussian;
  if (s == "srht") return MultiplierKind::srht;
  if (s == "srft") return MultiplierKind::srft;
  if (s == "arht") return MultiplierKind::arht;
  if (s == "arft") return MultiplierKind::arft;
  if (s == "quasi_gaussian") return MultiplierKind::quasi_gaussian;
  throw ArgumentError("unknown multiplier kind '" + s + "'");
}

std::string to_string(MultiplierKind k) {
  switch (k) {
    case MultiplierKind::gaussian: return "gaussian";
    case MultiplierKind::srht: return "srht";
    case MultiplierKind::srft: return "srft";
    case MultiplierKind::arht: return "arht";
    case MultiplierKind::arft: return "arft";
    case MultiplierKind::quasi_gaussian: return "quasi_gaussian";
  }
  return "?";
}

namespace {

std::size_t padded_size(std::size_t n, PadPolicy pad) {
  if (n == 0) throw ArgumentError("transform: n must be positive");
  if (std::has_single_bit(n)) return n;
  if (pad == PadPolicy::error) throw ArgumentError("transform: n must be a power of two");
  return std::bit_ceil(n);
}

std::size_t bit_reverse(std::size_t t, std::size_t bits) {
  std::size_t r = 0;
  for (std::size_t b = 0; b < bits; ++b) r |= ((t >> b) & 1u) << (bits - 1 - b);
  return r;
}

template <Scalar T>
void copy_row(const Matrix<T>& from, std::size_t i, Matrix<T>& to, std::size_t j) {
  std::copy_n(from.data() + i * from.cols(), from.cols(), to.data() + j * to.cols());
}

// (P X)_i = X_{perm_i}.
template <Scalar T>
Matrix<T> permute_rows(const Matrix<T>& X, const std::vector<std::size_t>& perm) {
  Matrix<T> Y(X.rows(), X.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) copy_row(X, perm[i], Y, i);
  return Y;
}

template <Scalar T>
Matrix<T> permute_rows_transposed(const Matrix<T>& X, const std::vector<std::size_t>& perm) {
  Matrix<T> Y(X.rows(), X.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) copy_row(X, i, Y, perm[i]);
  return Y;
}

template <Scalar T>
void scale_rows(Matrix<T>& X, const std::vector<T>& d, bool conjugate) {
  const std::size_t c = X.cols();
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const T s = conjugate ? T(curlra::conj(d[i])) : d[i];
    T* row = X.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) row[j] *= s;
  }
}

template <Scalar T>
Matrix<T> scaled(Matrix<T> X, double s) {
  if (s != 1.0)
    for (std::size_t t = 0; t < X.size(); ++t) X.data()[t] *= s;
  return X;
}

int permutation_sign(const std::vector<std::size_t>& p) {
  std::vector<bool> seen(p.size(), false);
  int sign = 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = p[j]) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

// (-1)^n prod(s): the factor L = I + diag(s) Z is singular exactly when this is 1.
double wrap_product(const std::vector<double>& s) {
  double p = s.size() % 2 ? -1.0 : 1.0;
  for (double v : s) p *= v;
  return p;
}

}  // namespace

template <Scalar T>
StructuredOp<T> build_arht(std::size_t n, std::size_t d, Rng& rng, const TransformOptions& opt) {
  const std::size_t N = padded_size(n, opt.pad);
  const std::size_t k = std::countr_zero(N);
  if (d < 1 || d > k) throw ArgumentError("build_arht: need 1 <= d <= log2(n)");
  StructuredOp<T> op;
  op.kind_ = MultiplierKind::arht;
  op.n_ = n;
  op.N_ = N;
  op.d_ = d;
  op.rows_ = op.cols_ = n;
  op.perm_.resize(N);
  op.diag_.assign(N, T(1));
  if (opt.randomize) {
    op.perm_ = rng.permutation(N);
    for (auto& v : op.diag_) v = T(rng.sign());
  } else {
    for (std::size_t i = 0; i < N; ++i) op.perm_[i] = i;
  }
  op.scale_ = opt.normalize ? 1.0 / std::sqrt(double(std::size_t(1) << d)) : 1.0;
  return op;
}

template <Scalar T>
StructuredOp<T> build_arft(std::size_t n, std::size_t d, Rng& rng, const TransformOptions& opt) {
  if constexpr (!is_complex_v<T>) {
    throw ArgumentError("build_arft: Fourier multipliers need the complex field");
  } else {
    const std::size_t N = padded_size(n, opt.pad);
    const std::size_t k = std::countr_zero(N);
    if (d < 1 || d > k) throw ArgumentError("build_arft: need 1 <= d <= log2(n)");
    StructuredOp<T> op;
    op.kind_ = MultiplierKind::arft;
    op.fourier_ = true;
    op.n_ = n;
    op.N_ = N;
    op.d_ = d;
    op.rows_ = op.cols_ = n;
    op.perm_.resize(N);
    op.diag_.assign(N, T(1));
    if (opt.randomize) {
      op.perm_ = rng.permutation(N);
      for (auto& v : op.diag_) v = rng.unit_circle();
    } else {
      for (std::size_t i = 0; i < N; ++i) op.perm_[i] = i;
    }
    // Slot p = t s + w holds output w 2^d + bitrev_d(t).
    const std::size_t s = N >> d;
    op.out_pos_.resize(N);
    for (std::size_t p = 0; p < N; ++p) op.out_pos_[p] = (p % s) * (N / s) + bit_reverse(p / s, d);
    op.scale_ = opt.normalize ? 1.0 / std::sqrt(double(std::size_t(1) << d)) : 1.0;
    return op;
  }
}

template <Scalar T>
StructuredOp<T> sample_columns(StructuredOp<T> op, std::size_t l, Rng& rng) {
  if (op.kind_ != MultiplierKind::arht && op.kind_ != MultiplierKind::arft && op.kind_ != MultiplierKind::srht &&
      op.kind_ != MultiplierKind::srft)
    throw ArgumentError("sample_columns: only Hadamard and Fourier transforms are sampled");
  if (!op.sample_.empty()) throw ArgumentError("sample_columns: already sampled");
  if (l > op.cols_) throw ArgumentError("sample_columns: l exceeds n");
  if (l == 0 || l == op.cols_) return op;
  op.sample_ = rng.sample_without_replacement(op.n_, l);
  op.cols_ = l;
  op.scale_ *= std::sqrt(double(op.n_) / double(l));
  return op;
}

template <Scalar T>
StructuredOp<T> build_srht(std::size_t n, std::size_t l, Rng& rng, const TransformOptions& opt) {
  if (l > n) throw ArgumentError("build_srht: l exceeds n");
  const std::size_t N = padded_size(n, opt.pad);
  auto op = build_arht<T>(n, std::countr_zero(N), rng, opt);
  op.kind_ = MultiplierKind::srht;
  return sample_columns(std::move(op), l, rng);
}

template <Scalar T>
StructuredOp<T> build_srft(std::size_t n, std::size_t l, Rng& rng, const TransformOptions& opt) {
  if (l > n) throw ArgumentError("build_srft: l exceeds n");
  const std::size_t N = padded_size(n, opt.pad);
  auto op = build_arft<T>(n, std::countr_zero(N), rng, opt);
  op.kind_ = MultiplierKind::srft;
  return sample_columns(std::move(op), l, rng);
}

template <Scalar T>
StructuredOp<T> build_gaussian_op(std::size_t n, std::size_t u, Rng& rng) {
  if (n == 0 || u == 0) throw ArgumentError("build_gaussian_op: empty shape");
  StructuredOp<T> op;
  op.kind_ = MultiplierKind::gaussian;
  op.rows_ = n;
  op.cols_ = u;
  op.dense_ = Matrix<T>(n, u);
  for (std::size_t t = 0; t < op.dense_.size(); ++t) op.dense_.data()[t] = T(rng.normal());
  return op;
}

template <Scalar T>
StructuredOp<T> build_quasi_gaussian(std::size_t n, std::size_t T_factors, Rng& rng, bool nonsingular) {
  if (n == 0 || T_factors == 0) throw ArgumentError("build_quasi_gaussian: need n >= 1 and T >= 1");
  StructuredOp<T> op;
  op.kind_ = MultiplierKind::quasi_gaussian;
  op.rows_ = op.cols_ = op.n_ = op.N_ = n;
  for (std::size_t t = 0; t < T_factors; ++t) {
    std::vector<double> s(n);
    for (auto& v : s) v = rng.sign();
    if (nonsingular && wrap_product(s) == 1.0) s[0] = -s[0];
    op.qsign_.push_back(std::move(s));
    op.qperm_.push_back(rng.permutation(n));
  }
  return op;
}

template <Scalar T>
StructuredOp<T> quasi_gaussian_from_factors(std::vector<std::vector<std::size_t>> perms,
                                            std::vector<std::vector<double>> signs) {
  if (perms.empty() || perms.size() != signs.size()) throw ArgumentError("quasi_gaussian_from_factors: need T >= 1 pairs");
  const std::size_t n = perms[0].size();
  for (std::size_t t = 0; t < perms.size(); ++t) {
    if (perms[t].size() != n || signs[t].size() != n) throw ArgumentError("quasi_gaussian_from_factors: size mismatch");
    std::vector<bool> seen(n, false);
    for (auto p : perms[t]) {
      if (p >= n || seen[p]) throw ArgumentError("quasi_gaussian_from_factors: not a permutation");
      seen[p] = true;
    }
    for (double v : signs[t])
      if (v != 1.0 && v != -1.0) throw ArgumentError("quasi_gaussian_from_factors: signs must be +-1");
  }
  StructuredOp<T> op;
  op.kind_ = MultiplierKind::quasi_gaussian;
  op.rows_ = op.cols_ = op.n_ = op.N_ = n;
  op.qperm_ = std::move(perms);
  op.qsign_ = std::move(signs);
  return op;
}

template <Scalar T>
Matrix<T> StructuredOp<T>::transform_forward(const Matrix<T>& X, OpCount* count) const {
  const std::size_t c = X.cols();
  Matrix<T> Z(N_, c);
  if (sample_.empty()) {
    for (std::size_t i = 0; i < n_; ++i) copy_row(X, i, Z, i);
  } else {
    for (std::size_t j = 0; j < sample_.size(); ++j) copy_row(X, j, Z, sample_[j]);
  }
  Matrix<T> Y = permute_rows(Z, perm_);
  if (!fourier_) {
    if (count) {
      const auto k = kernels::butterfly_columns_reference(Y, N_ >> d_);
      count->adds += k.adds;
    } else {
      kernels::butterfly_columns_parallel(Y, N_ >> d_);
    }
  } else if constexpr (is_complex_v<T>) {
    if (count) {
      const auto k = kernels::dif_columns_reference(Y, d_);
      count->adds += k.adds;
      count->mults += k.mults;
    } else {
      kernels::dif_columns_parallel(Y, d_);
    }
    Y = permute_rows_transposed(Y, out_pos_);
  }
  scale_rows(Y, diag_, false);
  Matrix<T> out(rows_, c);
  for (std::size_t i = 0; i < rows_; ++i) copy_row(Y, i, out, i);
  return scaled(std::move(out), scale_);
}

template <Scalar T>
Matrix<T> StructuredOp<T>::transform_adjoint(const Matrix<T>& Y) const {
  const std::size_t c = Y.cols();
  Matrix<T> Z(N_, c);
  for (std::size_t i = 0; i < rows_; ++i) copy_row(Y, i, Z, i);
  scale_rows(Z, diag_, true);
  if (!fourier_) {
    kernels::butterfly_columns_parallel(Z, N_ >> d_);
  } else if constexpr (is_complex_v<T>) {
    Z = permute_rows(Z, out_pos_);
    kernels::dif_adjoint_columns_parallel(Z, d_);
  }
  Matrix<T> V = permute_rows_transposed(Z, perm_);
  Matrix<T> out(cols_, c);
  if (sample_.empty()) {
    for (std::size_t i = 0; i < n_; ++i) copy_row(V, i, out, i);
  } else {
    for (std::size_t j = 0; j < sample_.size(); ++j) copy_row(V, sample_[j], out, j);
  }
  return scaled(std::move(out), scale_);
}

namespace {

// L X with L = I + diag(s) Z: row i gains s_i * row (i - 1) cyclically.
template <Scalar T>
Matrix<T> apply_L(const Matrix<T>& X, const std::vector<double>& s, OpCount* count) {
  const std::size_t n = X.rows(), c = X.cols();
  Matrix<T> Y = X;
  for (std::size_t i = 0; i < n; ++i) {
    const T* prev = X.data() + ((i + n - 1) % n) * c;
    T* row = Y.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) row[j] += s[i] * prev[j];
  }
  if (count) count->adds += n * c;
  return Y;
}

// L^T Y: row j gains s_{j+1} * row (j + 1) cyclically.
template <Scalar T>
Matrix<T> apply_Lt(const Matrix<T>& X, const std::vector<double>& s) {
  const std::size_t n = X.rows(), c = X.cols();
  Matrix<T> Y = X;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t nx = (j + 1) % n;
    const T* next = X.data() + nx * c;
    T* row = Y.data() + j * c;
    for (std::size_t q = 0; q < c; ++q) row[q] += s[nx] * next[q];
  }
  return Y;
}

// Solves L^T Z = Y. Backward sweep z_j = a_j + b_j z_0, closed by the wrap.
template <Scalar T>
Matrix<T> solve_Lt(const Matrix<T>& Y, const std::vector<double>& s) {
  const std::size_t n = Y.rows(), c = Y.cols();
  Matrix<T> A = Y;
  std::vector<double> b(n);
  b[n - 1] = -s[0];
  for (std::size_t j = n - 1; j-- > 0;) {
    const T* an = A.data() + (j + 1) * c;
    T* aj = A.data() + j * c;
    for (std::size_t q = 0; q < c; ++q) aj[q] -= s[j + 1] * an[q];
    b[j] = -s[j + 1] * b[j + 1];
  }
  const double denom = 1.0 - b[0];
  if (denom == 0) throw NumericalFailure("quasi-Gaussian factor is singular");
  std::vector<T> z0(c);
  for (std::size_t q = 0; q < c; ++q) z0[q] = A(0, q) / denom;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t q = 0; q < c; ++q) A(j, q) += b[j] * z0[q];
  return A;
}

}  // namespace

template <Scalar T>
Matrix<T> StructuredOp<T>::quasi_forward(Matrix<T> X, OpCount* count) const {
  for (std::size_t t = qsign_.size(); t-- > 0;) X = apply_L(permute_rows(X, qperm_[t]), qsign_[t], count);
  return X;
}

template <Scalar T>
Matrix<T> StructuredOp<T>::quasi_adjoint(Matrix<T> Y) const {
  for (std::size_t t = 0; t < qsign_.size(); ++t) Y = permute_rows_transposed(apply_Lt(Y, qsign_[t]), qperm_[t]);
  return Y;
}

template <Scalar T>
Matrix<T> StructuredOp<T>::quasi_inverse_adjoint(Matrix<T> Y) const {
  for (std::size_t t = qsign_.size(); t-- > 0;) Y = solve_Lt(permute_rows(Y, qperm_[t]), qsign_[t]);
  return Y;
}

template <Scalar T>
Matrix<T> StructuredOp<T>::apply_to_columns(const Matrix<T>& X, OpCount* count) const {
  if (X.rows() != cols_) throw ArgumentError("StructuredOp::apply: shape mismatch");
  switch (kind_) {
    case MultiplierKind::gaussian:
      if (count) count->mults += 2 * rows_ * cols_ * X.cols();
      return matmul(dense_, X);
    case MultiplierKind::quasi_gaussian: return quasi_forward(X, count);
    default: return transform_forward(X, count);
  }
}

template <Scalar T>
Matrix<T> StructuredOp<T>::apply_adjoint_to_columns(const Matrix<T>& Y) const {
  if (Y.rows() != rows_) throw ArgumentError("StructuredOp::apply_adjoint: shape mismatch");
  switch (kind_) {
    case MultiplierKind::gaussian: return matmul_adj(dense_, Y);
    case MultiplierKind::quasi_gaussian: return quasi_adjoint(Y);
    default: return transform_adjoint(Y);
  }
}

template <Scalar T>
std::vector<T> StructuredOp<T>::apply(const std::vector<T>& x, OpCount* count) const {
  return apply_to_columns(Matrix<T>(x.size(), 1, x), count).storage();
}

template <Scalar T>
Matrix<T> StructuredOp<T>::right_multiply(const Matrix<T>& W) const {
  if (W.cols() != rows_) throw ArgumentError("StructuredOp::right_multiply: shape mismatch");
  return apply_adjoint_to_columns(W.adjoint()).adjoint();
}

template <Scalar T>
bool StructuredOp<T>::has_fast_pinv() const {
  switch (kind_) {
    case MultiplierKind::gaussian: return false;
    case MultiplierKind::quasi_gaussian:
      return std::none_of(qsign_.begin(), qsign_.end(), [](const auto& s) { return wrap_product(s) == 1.0; });
    default: return !padded();
  }
}

template <Scalar T>
Matrix<T> StructuredOp<T>::right_multiply_pinv(const Matrix<T>& R) const {
  if (R.cols() != cols_) throw ArgumentError("StructuredOp::right_multiply_pinv: shape mismatch");
  if (!has_fast_pinv()) return matmul(R, pinv(densify()));
  if (kind_ == MultiplierKind::quasi_gaussian) return quasi_inverse_adjoint(R.adjoint()).adjoint();
  // M^H M = g I with g = scale^2 2^d.
  const double g = scale_ * scale_ * double(std::size_t(1) << d_);
  return scaled(apply_to_columns(R.adjoint()).adjoint(), 1.0 / g);
}

template <Scalar T>
Matrix<T> StructuredOp<T>::densify() const {
  return apply_to_columns(Matrix<T>::identity(cols_));
}

template <Scalar T>
double StructuredOp<T>::flop_estimate() const {
  switch (kind_) {
    case MultiplierKind::gaussian: return 2.0 * double(rows_) * double(cols_);
    case MultiplierKind::quasi_gaussian: return double(qsign_.size()) * double(n_);
    case MultiplierKind::arft:
    case MultiplierKind::srft: return 1.5 * double(d_) * double(N_);
    default: return double(d_) * double(N_);
  }
}

template <Scalar T>
std::vector<double> StructuredOp<T>::factor_determinants() const {
  std::vector<double> dets;
  for (std::size_t t = 0; t < qsign_.size(); ++t)
    dets.push_back((1.0 - wrap_product(qsign_[t])) * permutation_sign(qperm_[t]));
  return dets;
}

template <Scalar T>
StructuredOp<T> build_multiplier(const MultiplierSpec& spec, Rng& rng) {
  TransformOptions topt;
  topt.pad = spec.pad;
  switch (spec.kind) {
    case MultiplierKind::gaussian: return build_gaussian_op<T>(spec.n, spec.u ? spec.u : spec.n, rng);
    case MultiplierKind::srht: return build_srht<T>(spec.n, spec.l ? spec.l : spec.n, rng, topt);
    case MultiplierKind::srft: return build_srft<T>(spec.n, spec.l ? spec.l : spec.n, rng, topt);
    case MultiplierKind::arht: return sample_columns(build_arht<T>(spec.n, spec.d, rng, topt), spec.l, rng);
    case MultiplierKind::arft: return sample_columns(build_arft<T>(spec.n, spec.d, rng, topt), spec.l, rng);
    case MultiplierKind::quasi_gaussian: return build_quasi_gaussian<T>(spec.n, spec.T, rng, spec.nonsingular);
  }
  throw ArgumentError("build_multiplier: unknown kind");
}

template <Scalar T>
StructuredOp<T> build_multiplier(const MultiplierSpec& spec) {
  Rng rng(spec.seed);
  return build_multiplier<T>(spec, rng);
}

template <Scalar T>
Matrix<T> SketchedCur<T>::reconstruct() const {
  return matmul(matmul(C, U), R);
}

template <Scalar T>
SketchedCur<T> back_map(const Matrix<T>& S, const CurLra<T>& cur, const StructuredOp<T>& H) {
  if (S.cols() != H.cols()) throw ArgumentError("back_map: S must be W H");
  SketchedCur<T> out;
  out.sketch = cur;
  out.R_sketch = S.select_rows(cur.I.indices());
  out.C = S.select_cols(cur.J.indices());
  out.U = cur.U;
  out.R = H.right_multiply_pinv(out.R_sketch);
  return out;
}

template <Scalar T>
SketchedCur<T> cur_with_multiplier_and_pinv(EntrySource<T>& W, std::size_t r, const StructuredOp<T>& H, Rng& rng,
                                            const MultiplierCurOptions& opt) {
  const bool tr = W.rows() > W.cols();
  const Matrix<T>& A = W.dense();
  const Matrix<T> Wp = tr ? A.adjoint() : A;
  if (H.rows() != Wp.cols()) throw ArgumentError("cur_with_multiplier_and_pinv: multiplier rows must match");
  if (H.cols() < H.rows()) throw ArgumentError("cur_with_multiplier_and_pinv: multiplier must have u >= n");
  if (r == 0 || r > Wp.rows()) throw ArgumentError("cur_with_multiplier_and_pinv: bad rank");

  const Matrix<T> S = H.right_multiply(Wp);
  const std::size_t k = opt.k ? opt.k : std::min(S.rows(), 4 * r);
  const std::size_t l = opt.l ? opt.l : std::min(S.cols(), 4 * r);
  EntrySource<T> src(S);
  LeverageOptions lo = opt.leverage;
  lo.scores = ScoreMode::svd_based;  // rows from the sample; columns uniform below
  const auto cur = cur_via_leverage_scores(src, r, k, l, uniform_scores(S.cols()), rng, lo);
  auto out = back_map(S, cur, H);
  if (tr) {
    out.transposed = true;
    Matrix<T> C = out.R.adjoint();
    out.R = out.C.adjoint();
    out.C = std::move(C);
    out.U = out.U.adjoint();
  }
  return out;
}

template <Scalar T>
SketchedCur<T> cur_with_multiplier_and_pinv(EntrySource<T>& W, std::size_t r, MultiplierSpec spec, Rng& rng,
                                            const MultiplierCurOptions& opt) {
  const std::size_t dim = std::max(W.rows(), W.cols());
  if (spec.n == 0) spec.n = dim;
  if (spec.kind == MultiplierKind::gaussian && spec.u == 0) spec.u = spec.n;
  const auto H = build_multiplier<T>(spec, rng);
  return cur_with_multiplier_and_pinv(W, r, H, rng, opt);
}

template <Scalar T>
CurLra<T> cur_with_gaussian_sampling(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l,
                                     std::size_t l_bar, Rng& rng, const GaussianSamplingOptions& opt,
                                     GaussianSamplingStats* stats) {
  const std::size_t m = W.rows(), n = W.cols();
  if (r == 0 || r > k || r > l || k > m || l > l_bar || l_bar > n)
    throw ArgumentError("cur_with_gaussian_sampling: need r <= k <= m and r <= l <= l_bar <= n");
  MultiplierSpec spec;
  if (opt.multiplier) {
    spec = *opt.multiplier;
  } else {
    spec.kind = MultiplierKind::gaussian;
  }
  spec.n = n;
  if (spec.kind == MultiplierKind::gaussian)
    spec.u = l_bar;
  else
    spec.l = l_bar;

  GaussianSamplingStats local;
  double last_sigma = 0;
  for (int attempt = 1; attempt <= std::max(1, opt.max_attempts); ++attempt) {
    local.attempts = std::size_t(attempt);
    const auto H = build_multiplier<T>(spec, rng);
    if (H.cols() != l_bar) throw ArgumentError("cur_with_gaussian_sampling: multiplier must be n x l_bar");
    const Matrix<T> S = H.right_multiply(W.dense());
    local.sketch_entries += S.size();
    const auto I = select_columns(S.adjoint(), r, k, opt.subalg, rng);
    if (!I) {
      last_sigma = 0;
      continue;
    }
    const std::size_t before = W.touched();
    const Matrix<T> R = W.rows_of(I->indices());
    local.stage3_entries += W.touched() - before;
    const auto J = select_columns(R, r, l, opt.subalg, rng);
    if (!J) continue;
    const Matrix<T> G = R.select_cols(J->indices());
    const auto sv = singular_values(G);
    last_sigma = sv.size() >= r ? sv[r - 1] : 0;
    if (sv.empty() || sv.size() < r || !(sv[r - 1] > kSingularGeneratorTol * sv[0])) continue;
    if (stats) *stats = local;
    return make_cur(*I, *J, G, r, m, n);
  }
  if (stats) *stats = local;
  throw UnluckySampling("cur_with_gaussian_sampling: every sketch was rank deficient", std::max(1, opt.max_attempts), last_sigma);
}

double SampledError::relative() const {
  if (input_frobenius > 0) return error_frobenius / input_frobenius;
  return error_frobenius > 0 ? std::numeric_limits<double>::infinity() : 0.0;
}

template <Scalar T>
SampledError sampled_error(EntrySource<T>& W, const SketchedCur<T>& cur, std::size_t q, std::size_t s, Rng& rng) {
  const std::size_t m = W.rows(), n = W.cols();
  if (q == 0 || s == 0 || q > m || s > n) throw ArgumentError("sampled_error: bad grid");
  if (cur.C.rows() != m || cur.R.cols() != n) throw ArgumentError("sampled_error: shape mismatch");
  SampledError e;
  e.rows = rng.sample_without_replacement(m, q);
  e.cols = rng.sample_without_replacement(n, s);
  const Matrix<T> Wg = W.block(e.rows, e.cols);
  const Matrix<T> Ag = matmul(matmul(cur.C.select_rows(e.rows), cur.U), cur.R.select_cols(e.cols));
  const double f = std::sqrt(double(m) * double(n) / (double(q) * double(s)));
  e.error_frobenius = f * std::sqrt(kernels::diff_frobenius2_parallel(Wg, Ag));
  e.input_frobenius = f * std::sqrt(frobenius2(Wg));
  return e;
}

template <Scalar T>
ProgressiveResult<T> cur_with_progressive_depth(EntrySource<T>& W, std::size_t r, Rng& rng,
                                                const ProgressiveOptions& opt) {
  if (opt.kind != MultiplierKind::arht && opt.kind != MultiplierKind::arft)
    throw ArgumentError("cur_with_progressive_depth: kind must be arht or arft");
  const std::size_t dim = std::max(W.rows(), W.cols());
  const std::size_t levels = std::countr_zero(std::bit_ceil(dim));
  const std::size_t q = opt.q ? opt.q : std::min<std::size_t>(W.rows(), 32);
  const std::size_t s = opt.s ? opt.s : std::min<std::size_t>(W.cols(), 32);
  ProgressiveResult<T> res;
  for (std::size_t d = 1; d <= std::max<std::size_t>(levels, 1); ++d) {
    MultiplierSpec spec;
    spec.kind = opt.kind;
    spec.n = dim;
    spec.d = d;
    res.depth = d;
    double est = std::numeric_limits<double>::infinity();
    try {
      res.cur = cur_with_multiplier_and_pinv(W, r, spec, rng, opt.cur);
      est = sampled_error(W, res.cur, q, s, rng).relative();
    } catch (const NumericalFailure&) {
      // Rank-deficient samples at this depth count as a failed test.
    }
    res.estimates.push_back(est);
    if (est <= opt.tol) {
      res.passed = true;
      break;
    }
  }
  return res;
}

KsResult quasi_gaussian_ks(std::size_t n, std::size_t T_factors, Rng& rng, std::size_t max_samples) {
  const auto op = build_quasi_gaussian<double>(n, T_factors, rng);
  const Mat G = op.densify();
  std::vector<double> pooled;
  pooled.reserve(G.size());
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = G(i, j);
    standardize(col);
    pooled.insert(pooled.end(), col.begin(), col.end());
  }
  if (pooled.size() > max_samples) {
    const auto pick = rng.sample_without_replacement(pooled.size(), max_samples);
    std::vector<double> sub;
    sub.reserve(max_samples);
    for (auto t : pick) sub.push_back(pooled[t]);
    pooled = std::move(sub);
  }
  return ks_test_normal(std::move(pooled));
}

#define CURLRA_PREPROCESS(T)                                                                                     \
  template class StructuredOp<T>;                                                                                \
  template StructuredOp<T> build_arht<T>(std::size_t, std::size_t, Rng&, const TransformOptions&);               \
  template StructuredOp<T> build_arft<T>(std::size_t, std::size_t, Rng&, const TransformOptions&);               \
  template StructuredOp<T> build_srht<T>(std::size_t, std::size_t, Rng&, const TransformOptions&);               \
  template StructuredOp<T> build_srft<T>(std::size_t, std::size_t, Rng&, const TransformOptions&);               \
  template StructuredOp<T> build_gaussian_op<T>(std::size_t, std::size_t, Rng&);                                 \
  template StructuredOp<T> build_quasi_gaussian<T>(std::size_t, std::size_t, Rng&, bool);                        \
  template StructuredOp<T> sample_columns<T>(StructuredOp<T>, std::size_t, Rng&);                                \
  template StructuredOp<T> build_multiplier<T>(const MultiplierSpec&);                                           \
  template StructuredOp<T> build_multiplier<T>(const MultiplierSpec&, Rng&);                                     \
  template struct SketchedCur<T>;                                                                                \
  template StructuredOp<T> quasi_gaussian_from_factors<T>(std::vector<std::vector<std::size_t>>,                 \
                                                          std::vector<std::vector<double>>);                     \
  template SketchedCur<T> back_map(const Matrix<T>&, const CurLra<T>&, const StructuredOp<T>&);                  \
  template SketchedCur<T> cur_with_multiplier_and_pinv(EntrySource<T>&, std::size_t, const StructuredOp<T>&,     \
                                                       Rng&, const MultiplierCurOptions&);                       \
  template SketchedCur<T> cur_with_multiplier_and_pinv(EntrySource<T>&, std::size_t, MultiplierSpec, Rng&,       \
                                                       const MultiplierCurOptions&);                             \
  template CurLra<T> cur_with_gaussian_sampling(EntrySource<T>&, std::size_t, std::size_t, std::size_t,          \
                                                std::size_t, Rng&, const GaussianSamplingOptions&,               \
                                                GaussianSamplingStats*);                                         \
  template SampledError sampled_error(EntrySource<T>&, const SketchedCur<T>&, std::size_t, std::size_t, Rng&);   \
  template ProgressiveResult<T> cur_with_progressive_depth(EntrySource<T>&, std::size_t, Rng&,                   \
                                                           const ProgressiveOptions&);
CURLRA_PREPROCESS(double)
CURLRA_PREPROCESS(cplx)
#undef CURLRA_PREPROCESS

}  // namespace curlra
