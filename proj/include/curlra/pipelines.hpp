#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curlra/entry_source.hpp"
#include "curlra/maxvol.hpp"
#include "curlra/random.hpp"
#include "curlra/skeleton.hpp"

namespace curlra {

// Sub-algorithm used to pick rows/columns out of a sketch.
enum class SubAlg {
  lu,     // LU with complete pivoting + dominant-submatrix swaps
  qr,     // strong rank-revealing QR
  dmm08,  // leverage-score sampling on the sketch
};
SubAlg parse_subalg(const std::string& s);
std::string to_string(SubAlg a);

struct PipelineStats {
  std::size_t attempts = 0;  // random draws consumed (1 = first draw worked)
  std::size_t reseeds = 0;   // C-A index sets replaced after a rank collapse
  std::size_t loops = 0;     // C-A loops actually run
};

struct PipelineOptions {
  SubAlg subalg = SubAlg::lu;
  int max_attempts = 10;
  PipelineStats* stats = nullptr;
};

// count columns of A (p x c, p >= r) whose r-projective volume is near maximal.
// Empty when A has numerical rank below r.
template <Scalar T>
std::optional<IndexSet> select_columns(const Matrix<T>& A, std::size_t r, std::size_t count, SubAlg alg, Rng& rng);

template <Scalar T>
CurLra<T> primitive_cur(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l, Rng& rng,
                        const PipelineOptions& opt = {});

// Random q x s sketch, then k rows and l columns chosen inside it.
template <Scalar T>
CurLra<T> cynical_cur(EntrySource<T>& W, std::size_t r, std::size_t q, std::size_t s, std::size_t k, std::size_t l,
                      Rng& rng, const PipelineOptions& opt = {});

// Random s columns; q rows maximizing projective volume in them; s columns in
// those rows; then k x l inside the resulting q x s sketch.
template <Scalar T>
CurLra<T> cynical_ca_cur(EntrySource<T>& W, std::size_t r, std::size_t q, std::size_t s, std::size_t k,
                         std::size_t l, Rng& rng, const PipelineOptions& opt = {});

template <Scalar T>
CurLra<T> cross_approximation(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l, std::size_t loops,
                              Rng& rng, const PipelineOptions& opt = {});

struct LeverageScores {
  std::vector<double> p;
  double beta = 1;
};

// p_j = beta |row_j(V)|^2 / r + (1 - beta) / n.
template <Scalar T>
LeverageScores leverage_scores_from_basis(const Matrix<T>& V, double beta = 1);
LeverageScores uniform_scores(std::size_t n);

struct SamplingPair {
  std::vector<std::size_t> indices;  // in draw order, repeats allowed
  std::vector<double> rescale;
};

SamplingPair sample_exactly_l(const LeverageScores& s, std::size_t l, Rng& rng);
SamplingPair sample_expected_l(const LeverageScores& s, std::size_t l, Rng& rng);

enum class Sampler { exactly_l, expected_l };
enum class ScoreMode { svd_based, uniform };

struct LeverageOptions : PipelineOptions {
  Sampler sampler = Sampler::exactly_l;
  ScoreMode scores = ScoreMode::svd_based;
  double beta = 1, beta_bar = 1;
  bool simple_nucleus = false;  // U = (W[I, J])^+ instead of D M^+ D-bar
};

template <Scalar T>
CurLra<T> cur_via_leverage(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l, Rng& rng,
                           const LeverageOptions& opt = {});
// Same, with the column scores supplied by the caller.
template <Scalar T>
CurLra<T> cur_via_leverage_scores(EntrySource<T>& W, std::size_t r, std::size_t k, std::size_t l,
                                  const LeverageScores& column_scores, Rng& rng, const LeverageOptions& opt = {});

// Top rank-r SVD of A V B from QRP factors of A (m x l) and B (k x n).
template <Scalar T>
TopSvd<T> lra_to_top_svd(const Matrix<T>& A, const Matrix<T>& V, const Matrix<T>& B, std::size_t r);

enum class SvdCurMode { deterministic, sampled };

template <Scalar T>
CurLra<T> top_svd_to_cur(EntrySource<T>& W, const TopSvd<T>& svd, std::size_t k, std::size_t l, SvdCurMode mode,
                         Rng& rng, const PipelineOptions& opt = {});
// ||U|| <= t_{m,l,h} t_{n,k,h} / sigma_r(W) for the deterministic mode.
double svd_cur_nucleus_bound(std::size_t m, std::size_t n, std::size_t k, std::size_t l, double h, double sigma_r);

// Leverage-score CUR of W with column scores taken from the crude LRA A B.
template <Scalar T>
CurLra<T> refine_lra(EntrySource<T>& W, const Matrix<T>& A, const Matrix<T>& B, std::size_t r, std::size_t k,
                     std::size_t l, Rng& rng, const LeverageOptions& opt = {});

// Flat description of one pipeline run, mirrored by the config file keys.
struct PipelineSpec {
  std::string variant = "primitive";  // primitive|cynical|cynical_ca|cross_approx|leverage|svd_to_cur
  std::size_t r = 8, k = 0, l = 0, q = 0, s = 0;  // zeros take defaults (k = l = r, q = s = 4r)
  std::size_t loops = 5;
  SubAlg subalg = SubAlg::lu;
  Sampler sampler = Sampler::exactly_l;
  ScoreMode scores = ScoreMode::svd_based;
  double beta = 1, beta_bar = 1;
  bool simple_nucleus = false;
  SvdCurMode svd_mode = SvdCurMode::deterministic;
  int max_attempts = 10;

  void resolve(std::size_t m, std::size_t n);  // fills defaults, checks r <= k <= q <= m, r <= l <= s <= n
};

template <Scalar T>
CurLra<T> run_pipeline(const PipelineSpec& spec, EntrySource<T>& W, Rng& rng, PipelineStats* stats = nullptr);

}  // namespace curlra
