#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curlra/entry_source.hpp"
#include "curlra/pipelines.hpp"
#include "curlra/random.hpp"
#include "curlra/skeleton.hpp"
#include "curlra/stats.hpp"

namespace curlra {

enum class MultiplierKind { gaussian, srht, srft, arht, arft, quasi_gaussian };
MultiplierKind parse_multiplier_kind(const std::string& s);
std::string to_string(MultiplierKind k);

// Hadamard and Fourier kinds need n = 2^k; other sizes are zero padded or rejected.
enum class PadPolicy { zero_pad, error };

struct TransformOptions {
  bool randomize = true;  // D and P; off gives the bare H_{n,d} / Omega_{n,d}
  bool normalize = true;  // 1/sqrt(2^d), so the square transform is unitary
  PadPolicy pad = PadPolicy::zero_pad;
};

struct OpCount {
  std::size_t adds = 0, mults = 0;
  std::size_t flops() const { return adds + mults; }
};

template <Scalar T>
class StructuredOp;

template <Scalar T>
StructuredOp<T> build_arht(std::size_t n, std::size_t d, Rng& rng, const TransformOptions& opt = {});
template <Scalar T>
StructuredOp<T> build_arft(std::size_t n, std::size_t d, Rng& rng, const TransformOptions& opt = {});
template <Scalar T>
StructuredOp<T> build_srht(std::size_t n, std::size_t l, Rng& rng, const TransformOptions& opt = {});
template <Scalar T>
StructuredOp<T> build_srft(std::size_t n, std::size_t l, Rng& rng, const TransformOptions& opt = {});
template <Scalar T>
StructuredOp<T> build_gaussian_op(std::size_t n, std::size_t u, Rng& rng);
// Product B_1 ... B_T of cyclic unit-bidiagonal +-1 factors times permutations.
// With nonsingular set, the wrap sign of each factor is chosen so the factor is invertible.
template <Scalar T>
StructuredOp<T> build_quasi_gaussian(std::size_t n, std::size_t T_factors, Rng& rng, bool nonsingular = false);

// Exact replay of a quasi-Gaussian product from its factors (perms[t], signs[t]).
template <Scalar T>
StructuredOp<T> quasi_gaussian_from_factors(std::vector<std::vector<std::size_t>> perms,
                                            std::vector<std::vector<double>> signs);

// Column sample of an abridged transform (n x l, scaled by sqrt(n / l)); l = 0 keeps all columns.
template <Scalar T>
StructuredOp<T> sample_columns(StructuredOp<T> op, std::size_t l, Rng& rng);

// Matrix M (rows x cols) applied without being formed. Immutable.
template <Scalar T>
class StructuredOp {
 public:
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  MultiplierKind kind() const { return kind_; }
  std::size_t depth() const { return d_; }
  bool padded() const { return N_ != n_; }

  // M x. The counter, when given, runs the serial kernels and records the
  // arithmetic of the transform stage (D and P excluded).
  std::vector<T> apply(const std::vector<T>& x, OpCount* count = nullptr) const;
  Matrix<T> apply_to_columns(const Matrix<T>& X, OpCount* count = nullptr) const;
  // M^H Y.
  Matrix<T> apply_adjoint_to_columns(const Matrix<T>& Y) const;
  // W M.
  Matrix<T> right_multiply(const Matrix<T>& W) const;
  // R M^+: M^H / g when M^H M = g I, factor inverses for invertible
  // quasi-Gaussian products, a dense pseudo-inverse otherwise.
  Matrix<T> right_multiply_pinv(const Matrix<T>& R) const;
  bool has_fast_pinv() const;

  // Audit only: forms M.
  Matrix<T> densify() const;
  // Transform-stage flops per applied vector.
  double flop_estimate() const;

  const std::vector<std::vector<std::size_t>>& factor_permutations() const { return qperm_; }
  const std::vector<std::vector<double>>& factor_signs() const { return qsign_; }
  // Quasi-Gaussian: det of each factor, 1 - (-1)^n prod(signs) up to the permutation sign.
  std::vector<double> factor_determinants() const;

 private:
  friend StructuredOp build_arht<T>(std::size_t, std::size_t, Rng&, const TransformOptions&);
  friend StructuredOp build_arft<T>(std::size_t, std::size_t, Rng&, const TransformOptions&);
  friend StructuredOp build_srht<T>(std::size_t, std::size_t, Rng&, const TransformOptions&);
  friend StructuredOp build_srft<T>(std::size_t, std::size_t, Rng&, const TransformOptions&);
  friend StructuredOp build_gaussian_op<T>(std::size_t, std::size_t, Rng&);
  friend StructuredOp build_quasi_gaussian<T>(std::size_t, std::size_t, Rng&, bool);
  friend StructuredOp sample_columns<T>(StructuredOp, std::size_t, Rng&);
  friend StructuredOp quasi_gaussian_from_factors<T>(std::vector<std::vector<std::size_t>>,
                                                     std::vector<std::vector<double>>);

  Matrix<T> transform_forward(const Matrix<T>& X, OpCount* count) const;
  Matrix<T> transform_adjoint(const Matrix<T>& Y) const;
  Matrix<T> quasi_forward(Matrix<T> X, OpCount* count) const;
  Matrix<T> quasi_adjoint(Matrix<T> Y) const;
  Matrix<T> quasi_inverse_adjoint(Matrix<T> Y) const;

  MultiplierKind kind_ = MultiplierKind::gaussian;
  std::size_t rows_ = 0, cols_ = 0;
  // Transforms: logical size n_, padded size N_, depth d_.
  std::size_t n_ = 0, N_ = 0, d_ = 0;
  bool fourier_ = false;
  std::vector<std::size_t> perm_;     // (P x)_i = x_{perm_i}
  std::vector<T> diag_;               // D
  std::vector<std::size_t> out_pos_;  // DIF in-place slot -> output index
  std::vector<std::size_t> sample_;   // selected columns, empty for all
  double scale_ = 1;
  // Gaussian.
  Matrix<T> dense_;
  // Quasi-Gaussian factors, B_t = L_t P_t with L_t = I + diag(s) Z (cyclic).
  std::vector<std::vector<std::size_t>> qperm_;
  std::vector<std::vector<double>> qsign_;
};

struct MultiplierSpec {
  MultiplierKind kind = MultiplierKind::arht;
  std::size_t n = 0;
  std::size_t u = 0;  // gaussian: columns (n x u)
  std::size_t l = 0;  // sampled columns for srht/srft/arht/arft; 0 keeps all
  std::size_t d = 1;  // abridged depth
  std::size_t T = 1;  // quasi-Gaussian factors
  bool nonsingular = true;
  PadPolicy pad = PadPolicy::zero_pad;
  std::uint64_t seed = 0;
};

// Fourier kinds require T = cplx.
template <Scalar T>
StructuredOp<T> build_multiplier(const MultiplierSpec& spec);
template <Scalar T>
StructuredOp<T> build_multiplier(const MultiplierSpec& spec, Rng& rng);

// W ~ C U R with C and U from a CUR of the pre-processed matrix.
template <Scalar T>
struct SketchedCur {
  Matrix<T> C, U, R;
  CurLra<T> sketch;     // CUR of S = W H (of W^H H when transposed)
  Matrix<T> R_sketch;   // S[I, :]
  bool transposed = false;
  Matrix<T> reconstruct() const;
};

// Maps a CUR of S = W H back to W: C = S[:, J], U, R = S[I, :] H^+.
template <Scalar T>
SketchedCur<T> back_map(const Matrix<T>& S, const CurLra<T>& cur, const StructuredOp<T>& H);

struct MultiplierCurOptions {
  std::size_t k = 0, l = 0;  // 0 -> min(dim, 4r)
  LeverageOptions leverage{};
};

// CUR via a large multiplier and its pseudo-inverse. H must have rows
// max(m, n) when m > n (W^H is processed), n otherwise, and cols >= rows.
template <Scalar T>
SketchedCur<T> cur_with_multiplier_and_pinv(EntrySource<T>& W, std::size_t r, const StructuredOp<T>& H, Rng& rng,
                                            const MultiplierCurOptions& opt = {});
// Builds H from the spec; spec.n and (for gaussian) spec.u default to the processed dimension.
template <Scalar T>
SketchedCur<T> cur_with_multiplier_and_pinv(EntrySource<T>& W, std::size_t r, MultiplierSpec spec, Rng& rng,
                                            const MultiplierCurOptions& opt = {});

struct GaussianSamplingOptions {
  std::optional<MultiplierSpec> multiplier;  // n x l_bar; Gaussian when empty
  SubAlg subalg = SubAlg::qr;
  int max_attempts = 10;
};

struct GaussianSamplingStats {
  std::size_t sketch_entries = 0;  // entries of W H-bar read in stage 2
  std::size_t stage3_entries = 0;  // entries of W read in stage 3
  std::size_t attempts = 0;
};

template <Scalar T>
CurLra<T> cur_with_gaussian_sampling(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l,
                                     std::size_t l_bar, Rng& rng, const GaussianSamplingOptions& opt = {},
                                     GaussianSamplingStats* stats = nullptr);

struct SampledError {
  double error_frobenius = 0;  // extrapolated ||W - CUR||_F
  double input_frobenius = 0;  // extrapolated ||W||_F
  double relative() const;
  std::vector<std::size_t> rows, cols;
};

// Reads a q x s grid of W only.
template <Scalar T>
SampledError sampled_error(EntrySource<T>& W, const SketchedCur<T>& cur, std::size_t q, std::size_t s, Rng& rng);

struct ProgressiveOptions {
  MultiplierKind kind = MultiplierKind::arht;  // arht or arft
  MultiplierCurOptions cur{};
  std::size_t q = 0, s = 0;  // posterior grid, 0 -> min(dim, 32)
  double tol = 1e-6;         // accepted sampled relative error
};

template <Scalar T>
struct ProgressiveResult {
  SketchedCur<T> cur;
  std::size_t depth = 0;
  bool passed = false;
  std::vector<double> estimates;  // one per depth tried
};

// Abridged depth d = 1, 2, ... until the sampled error passes or d = log2(n).
template <Scalar T>
ProgressiveResult<T> cur_with_progressive_depth(EntrySource<T>& W, std::size_t r, Rng& rng,
                                                const ProgressiveOptions& opt = {});

// KS test of the densified quasi-Gaussian product: entries standardized per
// column, pooled, at most max_samples of them drawn without replacement.
KsResult quasi_gaussian_ks(std::size_t n, std::size_t T_factors, Rng& rng, std::size_t max_samples = 100000);

}  // namespace curlra
