#include <gtest/gtest.h>

#include <cmath>

#include "curlra/generators.hpp"
#include "curlra/pipelines.hpp"
#include "test_util.hpp"

using namespace curlra;
using namespace curlra::testing;

namespace {

template <Scalar T>
double rel_err(const Matrix<T>& W, const CurLra<T>& cur) {
  return rel_diff(reconstruct(cur, W), W);
}

double rel_spectral(const Mat& W, const CurLra<double>& cur) {
  return norm(Mat(W - reconstruct(cur, W)), NormKind::spectral) / norm(W, NormKind::spectral);
}

Mat factor_gaussian(std::size_t m, std::size_t n, std::size_t r, double eps, Rng& rng) {
  FactorGaussianSpec s;
  s.m = m;
  s.n = n;
  s.r = r;
  s.eps = eps;
  return gen_factor_gaussian(s, rng).W;
}

}  // namespace

TEST(Primitive, RankOneIsExact) {
  Rng rng(50);
  const Mat W = matmul(random_mat(12, 1, rng), random_mat(1, 9, rng));
  EntrySource<double> src(W);
  const auto cur = primitive_cur(src, 1, 1, 1, rng);
  EXPECT_LT(rel_err(W, cur), 1e-12);
  EXPECT_EQ(src.touched(), 1u);
}

TEST(Primitive, PlusMinusDeltaFailureRate) {
  // Only a draw covering the nonzero entry yields a usable generator.
  const std::size_t m = 8, n = 8, k = 2, l = 2;
  const Mat W = gen_plus_minus_delta(m, n, 5, 2, 1);
  PipelineOptions opt;
  opt.max_attempts = 1;
  int failures = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    Rng rng(51, t);
    EntrySource<double> src(W);
    try {
      const auto cur = primitive_cur(src, 1, k, l, rng, opt);
      EXPECT_LT(rel_err(W, cur), 1e-12);
    } catch (const UnluckySampling& e) {
      EXPECT_EQ(e.attempts, 1);
      EXPECT_EQ(e.last_sigma_r, 0.0);
      ++failures;
    }
  }
  const double expected = 1 - double(k) / m * double(l) / n;
  EXPECT_NEAR(double(failures) / trials, expected, 0.05);
}

TEST(Primitive, RetriesThenReportsDiagnostics) {
  const Mat Z(10, 10);
  EntrySource<double> src(Z);
  Rng rng(52);
  PipelineStats st;
  PipelineOptions opt;
  opt.stats = &st;
  try {
    primitive_cur(src, 2, 3, 3, rng, opt);
    FAIL();
  } catch (const UnluckySampling& e) {
    EXPECT_EQ(e.attempts, 10);
    EXPECT_EQ(st.attempts, 10u);
  }
  EXPECT_EQ(src.touched(), 10u * 9);
  EXPECT_THROW(primitive_cur(src, 3, 2, 3, rng), ArgumentError);
}

TEST(Primitive, Table1Tests1Scale) {
  double sum = 0;
  const int seeds = 30;
  for (int t = 0; t < seeds; ++t) {
    Rng rng(53, t);
    const Mat W = factor_gaussian(256, 256, 8, 1e-10, rng);
    EntrySource<double> src(W);
    sum += rel_spectral(W, primitive_cur(src, 8, 8, 8, rng));
  }
  EXPECT_LE(sum / seeds, 1e-4);
}

TEST(Cynical, CollapsesToPrimitive) {
  Rng data(54);
  const Mat W = random_rank(30, 25, 3, data);
  for (int t = 0; t < 10; ++t) {
    Rng a(55, t), b(55, t);
    EntrySource<double> s1(W), s2(W);
    EXPECT_EQ(cynical_cur(s1, 3, 4, 5, 4, 5, a), primitive_cur(s2, 3, 4, 5, b));
  }
}

TEST(Cynical, ExactOnRankRAndSmallError) {
  Rng rng(56);
  for (auto alg : {SubAlg::lu, SubAlg::qr, SubAlg::dmm08}) {
    PipelineOptions opt;
    opt.subalg = alg;
    const Mat W = random_rank(60, 50, 4, rng);
    EntrySource<double> src(W);
    const auto cur = cynical_cur(src, 4, 16, 16, 4, 6, rng, opt);
    EXPECT_LT(rel_err(W, cur), 1e-9) << to_string(alg);
    EXPECT_EQ(src.touched(), 16u * 16);
  }
  double sum = 0;
  const int seeds = 20;
  for (int t = 0; t < seeds; ++t) {
    Rng r2(57, t);
    const Mat W = factor_gaussian(256, 256, 8, 1e-10, r2);
    EntrySource<double> src(W);
    sum += rel_spectral(W, cynical_cur(src, 8, 32, 32, 8, 8, r2));
  }
  EXPECT_LE(sum / seeds, 1e-4);
}

TEST(CynicalCa, ExactOnRankR) {
  Rng rng(58);
  const Mat W = random_rank(80, 70, 5, rng);
  EntrySource<double> src(W);
  const auto cur = cynical_ca_cur(src, 5, 20, 20, 5, 5, rng);
  EXPECT_LT(rel_err(W, cur), 1e-9);
  EXPECT_EQ(src.touched(), 80u * 20 + 20 * 70);
}

TEST(CrossApproximation, ExactStopsEarlyAndStaysInBudget) {
  Rng rng(59);
  for (auto alg : {SubAlg::lu, SubAlg::qr, SubAlg::dmm08}) {
    const Mat W = random_rank(100, 90, 6, rng);
    EntrySource<double> src(W);
    PipelineStats st;
    PipelineOptions opt;
    opt.subalg = alg;
    opt.stats = &st;
    const auto cur = cross_approximation(src, 6, 6, 8, 5, rng, opt);
    EXPECT_LT(rel_err(W, cur), 1e-9) << to_string(alg);
    EXPECT_LE(st.loops, 5u);
    EXPECT_EQ(src.touched(), st.loops * (6 * 90 + 100 * 8));
    if (alg == SubAlg::lu) EXPECT_LT(st.loops, 5u);
  }
}

TEST(CrossApproximation, FixedPointAfterConvergence) {
  Rng rng(60);
  const Mat W = factor_gaussian(64, 64, 4, 1e-10, rng);
  EntrySource<double> src(W);
  const auto first = cross_approximation(src, 4, 4, 4, 20, rng);
  // A second run seeded at the converged rows stabilizes in one more loop.
  const Mat H = W.select_rows(first.I.indices());
  const auto J = select_columns(H, 4, 4, SubAlg::lu, rng);
  ASSERT_TRUE(J.has_value());
  EXPECT_EQ(*J, first.J);
  const auto I = select_columns(Mat(W.select_cols(J->indices()).adjoint()), 4, 4, SubAlg::lu, rng);
  EXPECT_EQ(*I, first.I);
}

TEST(CrossApproximation, ReseedsAfterRankCollapse) {
  Rng rng(61);
  Mat W(40, 30);
  const Mat top = random_rank(6, 30, 2, rng);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 30; ++j) W(i, j) = top(i, j);
  std::size_t reseeds = 0;
  for (int t = 0; t < 10; ++t) {
    Rng r2(62, t);
    EntrySource<double> src(W);
    PipelineStats st;
    PipelineOptions opt;
    opt.stats = &st;
    try {
      const auto cur = cross_approximation(src, 2, 2, 2, 8, r2, opt);
      EXPECT_LT(rel_err(W, cur), 1e-9);
    } catch (const UnluckySampling&) {
    }
    reseeds += st.reseeds;
  }
  EXPECT_GT(reseeds, 0u);
}

TEST(CrossApproximation, Table1Tests2Scale) {
  double sum = 0;
  const int seeds = 20;
  for (int t = 0; t < seeds; ++t) {
    Rng rng(63, t);
    const Mat W = factor_gaussian(256, 256, 8, 1e-10, rng);
    EntrySource<double> src(W);
    sum += rel_spectral(W, cross_approximation(src, 8, 8, 8, 5, rng));
  }
  EXPECT_LE(sum / seeds, 1e-5);
}

TEST(CrossApproximation, ComplexInput) {
  Rng rng(64);
  const CMat W = matmul(random_cmat(50, 3, rng), random_cmat(3, 40, rng));
  EntrySource<cplx> src(W);
  EXPECT_LT(rel_err(W, cross_approximation(src, 3, 3, 3, 4, rng)), 1e-9);
}

TEST(Leverage, ScoresFromBasis) {
  Mat V(3, 2);
  V(0, 0) = V(1, 1) = 1;
  const auto s = leverage_scores_from_basis(V);
  EXPECT_EQ(s.p, (std::vector<double>{0.5, 0.5, 0}));
  const auto b = leverage_scores_from_basis(V, 0.5);
  EXPECT_DOUBLE_EQ(b.p[2], 0.5 / 3);
  EXPECT_THROW(leverage_scores_from_basis(Mat{{1, 0}, {0, 2}}), ArgumentError);
  EXPECT_THROW(leverage_scores_from_basis(V, 0.0), ArgumentError);

  Rng rng(65);
  const auto q = truncate(svd(random_mat(64, 4, rng)), 4).S;
  const auto g = leverage_scores_from_basis(q);
  double sum = 0;
  for (double p : g.p) {
    EXPECT_GE(p, 0.0);
    sum += p;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Sampling, ExactlyL) {
  Rng rng(66);
  const auto u = sample_exactly_l(uniform_scores(10), 4, rng);
  ASSERT_EQ(u.indices.size(), 4u);
  for (double d : u.rescale) EXPECT_DOUBLE_EQ(d, std::sqrt(10.0 / 4));
  const auto pm = sample_exactly_l(LeverageScores{{1, 0, 0}, 1}, 5, rng);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(pm.indices[t], 0u);
    EXPECT_DOUBLE_EQ(pm.rescale[t], 1 / std::sqrt(5.0));
  }
  const auto f = sample_exactly_l(LeverageScores{{0.5, 0.3, 0.2}, 1}, 10000, rng);
  std::vector<double> freq(3, 0);
  for (auto i : f.indices) freq[i] += 1e-4;
  EXPECT_NEAR(freq[0], 0.5, 0.02);
  EXPECT_NEAR(freq[1], 0.3, 0.02);
  EXPECT_NEAR(freq[2], 0.2, 0.02);
  EXPECT_THROW(sample_exactly_l(LeverageScores{{0.5, 0.2}, 1}, 2, rng), ArgumentError);
}

TEST(Sampling, ExpectedL) {
  Rng rng(67);
  const auto all = sample_expected_l(LeverageScores{{0.25, 0.25, 0.5}, 1}, 4, rng);
  EXPECT_EQ(all.indices, (std::vector<std::size_t>{0, 1, 2}));
  for (double d : all.rescale) EXPECT_EQ(d, 1.0);
  const auto id = sample_expected_l(uniform_scores(7), 7, rng);
  EXPECT_EQ(id.indices.size(), 7u);

  const LeverageScores s{{0.4, 0.3, 0.1, 0.1, 0.05, 0.05}, 1};
  const std::size_t l = 3;
  double expect = 0;
  for (double p : s.p) expect += std::min(1.0, l * p);
  double mean = 0;
  for (int t = 0; t < 1000; ++t) mean += sample_expected_l(s, l, rng).indices.size() / 1000.0;
  EXPECT_NEAR(mean, expect, 0.1 * expect);
  EXPECT_LE(expect, double(l));
}

TEST(Sampling, SingularValueCorridor) {
  Rng rng(68);
  const std::size_t n = 256, r = 4;
  const double delta = 0.1;
  const std::size_t l = std::ceil(4 * r * std::log(2 * r / delta));
  const double gamma = std::sqrt(4 * r * std::log(2 * r / delta) / l);
  int inside = 0;
  for (int t = 0; t < 100; ++t) {
    const Mat V = truncate(svd(random_mat(n, r, rng)), r).S;
    const auto sp = sample_exactly_l(leverage_scores_from_basis(V), l, rng);
    Mat VSD(r, l);
    for (std::size_t c = 0; c < l; ++c)
      for (std::size_t i = 0; i < r; ++i) VSD(i, c) = V(sp.indices[c], i) * sp.rescale[c];
    bool ok = true;
    for (double s : oracle_singular_values(VSD)) ok = ok && s * s >= 1 - gamma && s * s <= 1 + gamma;
    inside += ok;
  }
  EXPECT_GE(inside, 90);
}

TEST(Leverage, ExactOnRankRInputs) {
  Rng rng(69);
  for (auto mode : {ScoreMode::svd_based, ScoreMode::uniform})
    for (bool simple : {false, true})
      for (auto sampler : {Sampler::exactly_l, Sampler::expected_l}) {
        const Mat W = random_rank(50, 40, 3, rng);
        EntrySource<double> src(W);
        LeverageOptions opt;
        opt.scores = mode;
        opt.simple_nucleus = simple;
        opt.sampler = sampler;
        const auto cur = cur_via_leverage(src, 3, 12, 12, rng, opt);
        EXPECT_LT(rel_err(W, cur), 1e-9);
        if (mode == ScoreMode::svd_based)
          EXPECT_EQ(src.dense_touched(), W.size());
        else
          EXPECT_EQ(src.dense_touched(), 0u);
      }
}

TEST(Leverage, UniformScoresOnFactorGaussian) {
  double sum = 0;
  const int seeds = 100;
  for (int t = 0; t < seeds; ++t) {
    Rng rng(70, t);
    const Mat W = factor_gaussian(256, 256, 8, 1e-10, rng);
    EntrySource<double> src(W);
    LeverageOptions opt;
    opt.scores = ScoreMode::uniform;
    const auto cur = cur_via_leverage(src, 8, 32, 32, rng, opt);
    sum += rel_diff(reconstruct(cur, W), W);
    EXPECT_LE(src.touched(), (256u + 256) * 64);
  }
  // Frobenius-relative error bounds the spectral one up to sqrt(rank).
  EXPECT_LE(sum / seeds, 1e-3);
}

TEST(Leverage, SvdScoresOnLargerPerturbedInput) {
  Rng rng(71);
  const Mat W = factor_gaussian(300, 300, 12, 1e-6, rng);
  EntrySource<double> src(W);
  const auto cur = cur_via_leverage(src, 12, 48, 48, rng);
  EXPECT_LE(rel_spectral(W, cur), 1e-3);
}

TEST(LraToSvd, RoundTripAndAudit) {
  Rng rng(72);
  const Mat W = random_rank(40, 30, 4, rng);
  const auto s = truncate(svd(W), 4);
  Mat A = s.S;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < 4; ++j) A(i, j) *= s.sigma[j];
  const auto back = lra_to_top_svd(A, Mat::identity(4), Mat(s.T.adjoint()), 4);
  const auto oracle = oracle_singular_values(W);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(back.sigma[i], oracle[i], 1e-10 * oracle[0]);
  EXPECT_LT(ortho_defect(back.S), 1e-12);
  EXPECT_LT(ortho_defect(back.T), 1e-12);

  for (int t = 0; t < 10; ++t) {
    const Mat N = W + [&] {
      Mat E = random_mat(40, 30, rng);
      E *= 1e-3;
      return E;
    }();
    const Mat a = random_mat(40, 6, rng), v = random_mat(6, 5, rng), b = random_mat(5, 30, rng);
    const Mat AVB = matmul(matmul(a, v), b);
    const auto top = lra_to_top_svd(a, v, b, 3);
    const double lhs = oracle_singular_values(Mat(N - reconstruct(top)))[0];
    const double rhs = oracle_singular_values(Mat(N - AVB))[0] + oracle_singular_values(Mat(AVB - reconstruct(top)))[0];
    EXPECT_LE(lhs, rhs + 1e-9 * oracle_singular_values(N)[0]);
    // The rank-3 truncation is optimal for AVB itself.
    EXPECT_NEAR(oracle_singular_values(Mat(AVB - reconstruct(top)))[0], oracle_singular_values(AVB)[3],
                1e-9 * oracle_singular_values(AVB)[0]);
  }

  const Mat u = random_mat(20, 1, rng), w = random_mat(1, 15, rng);
  const auto one = lra_to_top_svd(u, Mat{{1}}, w, 1);
  EXPECT_NEAR(one.sigma[0], std::sqrt(frobenius2(u) * frobenius2(w)), 1e-12 * one.sigma[0]);
  EXPECT_THROW(lra_to_top_svd(u, Mat(1, 1), w, 1), RankMismatch);
}

TEST(SvdToCur, SelectsSupportAndIsExact) {
  Rng rng(73);
  // Orthogonal diagonal blocks at rows {2, 5} and columns {1, 6}.
  Mat W(8, 8);
  W(2, 1) = 3;
  W(5, 6) = 2;
  EntrySource<double> src(W);
  const auto cur = top_svd_to_cur(src, truncate(svd(W), 2), 2, 2, SvdCurMode::deterministic, rng);
  EXPECT_EQ(cur.I.indices(), (std::vector<std::size_t>{2, 5}));
  EXPECT_EQ(cur.J.indices(), (std::vector<std::size_t>{1, 6}));

  for (auto mode : {SvdCurMode::deterministic, SvdCurMode::sampled}) {
    const Mat R = random_rank(50, 45, 5, rng);
    EntrySource<double> s2(R);
    const auto top = truncate(svd(R), 5);
    const auto c = top_svd_to_cur(s2, top, 5, 5, mode, rng);
    EXPECT_LT(rel_err(R, c), 1e-9);
    if (mode == SvdCurMode::deterministic) {
      EXPECT_LE(norm(c.U, NormKind::spectral), svd_cur_nucleus_bound(50, 45, 5, 5, 1.1, top.sigma[4]));
    }
  }

  const Mat S = random_mat(4, 4, rng);
  EntrySource<double> s3(S);
  const auto sq = top_svd_to_cur(s3, svd(S), 4, 4, SvdCurMode::deterministic, rng);
  EXPECT_EQ(sq.I, IndexSet::range(4, 4));
  EXPECT_LT(rel_diff(sq.U, eigen_pinv(S)), 1e-10);
}

TEST(Refine, ImprovesCrudeLra) {
  int better = 0;
  for (int t = 0; t < 100; ++t) {
    Rng rng(74, t);
    const Mat W = factor_gaussian(80, 70, 4, 1e-10, rng);
    const auto s = truncate(svd(W), 4);
    Mat A = s.S;
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < 4; ++j) A(i, j) *= s.sigma[j] * (1 + 0.01 * rng.normal());
    const Mat B = s.T.adjoint();
    const double crude = rel_diff(matmul(A, B), W);
    EntrySource<double> src(W);
    const auto cur = refine_lra(src, A, B, 4, 16, 16, rng);
    better += rel_diff(reconstruct(cur, W), W) <= crude;
  }
  EXPECT_GE(better, 80);

  Rng rng(75);
  const Mat W = random_rank(30, 30, 3, rng);
  EntrySource<double> src(W);
  EXPECT_THROW(refine_lra(src, random_mat(30, 2, rng), random_mat(2, 30, rng), 3, 6, 6, rng), RankMismatch);
}

TEST(Pipelines, SublinearityAudit) {
  Rng data(76);
  const std::size_t m = 300, n = 280, r = 5;
  const Mat W = factor_gaussian(m, n, r, 1e-10, data);
  for (const char* v : {"primitive", "cynical", "cynical_ca", "cross_approx", "leverage", "svd_to_cur"}) {
    PipelineSpec spec;
    spec.variant = v;
    spec.r = r;
    spec.scores = ScoreMode::uniform;
    spec.k = spec.l = 2 * r;
    Rng rng(77);
    EntrySource<double> src(W);
    const auto cur = run_pipeline(spec, src, rng);
    EXPECT_LE(src.touched(), 4 * (m + n) * (spec.k + spec.l) * spec.loops) << v;
    EXPECT_EQ(src.dense_touched(), 0u) << v;
    EXPECT_LT(rel_err(W, cur), 1e-6) << v;
  }
}

TEST(Pipelines, DeterministicGivenSeed) {
  Rng data(78);
  const Mat W = factor_gaussian(64, 64, 4, 1e-10, data);
  for (const char* v : {"primitive", "cynical", "cynical_ca", "cross_approx", "leverage", "svd_to_cur"}) {
    PipelineSpec spec;
    spec.variant = v;
    spec.r = 4;
    Rng a(79), b(79);
    EntrySource<double> s1(W), s2(W);
    EXPECT_EQ(run_pipeline(spec, s1, a), run_pipeline(spec, s2, b)) << v;
  }
}

TEST(Pipelines, SpecValidation) {
  PipelineSpec spec;
  spec.r = 4;
  spec.resolve(100, 100);
  EXPECT_EQ(spec.k, 4u);
  EXPECT_EQ(spec.q, 16u);
  PipelineSpec bad;
  bad.r = 4;
  bad.k = 10;
  bad.q = 8;
  EXPECT_THROW(bad.resolve(100, 100), ArgumentError);
  PipelineSpec unknown;
  unknown.variant = "nope";
  unknown.r = 1;
  const Mat W = Mat::identity(4);
  EntrySource<double> src(W);
  Rng rng(1);
  EXPECT_THROW(run_pipeline(unknown, src, rng), ArgumentError);
  EXPECT_THROW(parse_subalg("x"), ArgumentError);
}
