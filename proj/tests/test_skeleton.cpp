#include <gtest/gtest.h>

#include <sstream>

#include "curlra/generators.hpp"
#include "curlra/skeleton.hpp"
#include "test_util.hpp"

using namespace curlra;
using namespace curlra::testing;

namespace {

IndexSet iset(std::vector<std::size_t> v, std::size_t bound) { return IndexSet::from_unsorted(std::move(v), bound); }

CurLra<double> canonical(const Mat& W, const IndexSet& I, const IndexSet& J, std::size_t r) {
  return make_cur(I, J, W.block(I.indices(), J.indices()), r, W.rows(), W.cols());
}

}  // namespace

TEST(Nucleus, Examples) {
  EXPECT_NEAR(canonical_nucleus(Mat{{5}}, 1)(0, 0), 0.2, 1e-15);
  const Mat U = canonical_nucleus(Mat(2, 2, 1.0), 1);
  EXPECT_LT(rel_diff(U, Mat(2, 2, 0.25)), 1e-14);
  const Mat D = canonical_nucleus(Mat{{3, 0}, {0, 1e-9}}, 1);
  EXPECT_NEAR(D(0, 0), 1.0 / 3, 1e-15);
  EXPECT_EQ(D(1, 1), 0.0);
  EXPECT_THROW(canonical_nucleus(Mat(2, 3, 1.0), 3), ArgumentError);
  EXPECT_THROW(canonical_nucleus(Mat(2, 2, 1.0), 2), SingularGenerator);
}

TEST(Nucleus, MatchesIndependentPseudoInverse) {
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const Mat A = random_mat(3 + rng.index(4), 3 + rng.index(4), rng);
    const std::size_t r = std::min(A.rows(), A.cols());
    EXPECT_LT(rel_diff(canonical_nucleus(A, r), eigen_pinv(A)), 1e-10);
  }
  // Truncated case against an explicit rank-r projection.
  const Mat A = random_mat(6, 5, rng);
  const Mat Ar = reconstruct(truncate(svd(A), 2));
  EXPECT_LT(rel_diff(canonical_nucleus(A, 2), eigen_pinv(Ar)), 1e-9);
}

TEST(Cur, ExactOnRankRInputs) {
  Rng rng(11);
  int checked = 0;
  for (int t = 0; t < 120; ++t) {
    const std::size_t m = 8 + rng.index(57), n = 8 + rng.index(57), r = 1 + rng.index(8);
    const Mat W = random_rank(m, n, r, rng);
    const std::size_t k = r + rng.index(3), l = r + rng.index(3);
    const IndexSet I(rng.sample_without_replacement(m, k), m), J(rng.sample_without_replacement(n, l), n);
    if (numerical_rank(W.block(I.indices(), J.indices()), 1e-8) != r) continue;
    const auto cur = canonical(W, I, J, r);
    EXPECT_LT(rel_diff(reconstruct(cur, W), W), 1e-9);
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(Cur, ApplyAgreesWithReconstruct) {
  Rng rng(12);
  const Mat W = random_rank(20, 15, 3, rng);
  const auto cur = canonical(W, IndexSet::range(3, 20), IndexSet::range(4, 15), 3);
  std::vector<double> x(15);
  for (auto& v : x) v = rng.normal();
  const auto y = apply(cur, W, x);
  const auto z = matvec(reconstruct(cur, W), x);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(y[i], z[i], 1e-10);
}

TEST(Cur, IdentityKeepsLeadingBlock) {
  const std::size_t n = 6, r = 2;
  const Mat W = Mat::identity(n);
  const auto cur = canonical(W, IndexSet::range(r, n), IndexSet::range(r, n), r);
  const Mat A = reconstruct(cur, W);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(A(i, j), (i == j && i < r) ? 1.0 : 0.0);
  EXPECT_EQ(numerical_rank(W - A), n - r);
}

TEST(Cur, PlusMinusDeltaWitness) {
  const Mat W = gen_plus_minus_delta(5, 5, 4, 4, -1) + Mat(5, 5, 1.0);
  const auto cur = canonical(W, iset({0}, 5), iset({1}, 5), 1);
  EXPECT_NEAR(dense_error(W, cur, NormKind::chebyshev).absolute, 1.0, 1e-14);
}

TEST(Cur, RankAgreementOnPerturbedInputs) {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    FactorGaussianSpec s;
    s.m = 40;
    s.n = 30;
    s.r = 1 + rng.index(5);
    s.eps = 1e-10;
    const Mat W = gen_factor_gaussian(s, rng).W;
    const auto I = rng.sample_without_replacement(40, s.r + 2), J = rng.sample_without_replacement(30, s.r + 1);
    const double tol = 1e-7;
    const std::size_t rw = numerical_rank(W, tol);
    EXPECT_EQ(rw, s.r);
    EXPECT_EQ(numerical_rank(W.select_cols(J), tol), rw);
    EXPECT_EQ(numerical_rank(W.select_rows(I), tol), rw);
    EXPECT_EQ(numerical_rank(W.block(I, J), tol), rw);
  }
}

TEST(Cur, ErrorNeverBelowEckartYoung) {
  Rng rng(14);
  for (int t = 0; t < 30; ++t) {
    const Mat W = random_mat(12, 10, rng);
    const std::size_t r = 1 + rng.index(4);
    const auto cur = canonical(W, IndexSet(rng.sample_without_replacement(12, r + 1), 12),
                               IndexSet(rng.sample_without_replacement(10, r), 10), r);
    for (auto kind : {NormKind::spectral, NormKind::frobenius}) {
      const auto e = dense_error(W, cur, kind, true);
      EXPECT_GE(e.relative, 0.0);
      // Tail values from the independent oracle.
      const auto sv = oracle_singular_values(W);
      double tail = 0;
      for (std::size_t j = r; j < sv.size(); ++j) tail += sv[j] * sv[j];
      const double floor = kind == NormKind::spectral ? sv[r] : std::sqrt(tail);
      EXPECT_NEAR(*e.sigma_tail, floor, 1e-10);
      EXPECT_GE(e.absolute, floor - 1e-12);
    }
  }
}

TEST(Apriori, ParameterSelection) {
  AprioriInputs in{1, 1, 1, 0.1, 0.0, 3, 3, 3, NormKind::spectral};
  auto b = apriori_error_bound(in);
  ASSERT_TRUE(b.available);
  EXPECT_EQ(b.value, 0.0);
  EXPECT_EQ(b.eta, 1.0);
  EXPECT_DOUBLE_EQ(b.mu, std::sqrt(2.0));
  in.k = 5;
  in.r = 2;
  b = apriori_error_bound(in);
  EXPECT_EQ(b.eta, 2.0);
  EXPECT_DOUBLE_EQ(b.mu, (1 + std::sqrt(5.0)) / 2);
  in.kind = NormKind::frobenius;
  in.sigma_tail = 0.5;
  b = apriori_error_bound(in);
  EXPECT_EQ(b.mu, 1.0);
  EXPECT_DOUBLE_EQ(b.theta, 0.1);
  EXPECT_DOUBLE_EQ(b.xi, std::sqrt(15.0) / 0.9);
  // By hand: 0.5 * ((1 + 1 + 0.5 + 2) * xi * 1 + 1).
  EXPECT_DOUBLE_EQ(b.value, 0.5 * (4.5 * b.xi + 1));
  in.normU_spectral = 10;
  EXPECT_FALSE(apriori_error_bound(in).available);
  in.normC = -1;
  EXPECT_THROW(apriori_error_bound(in), ArgumentError);
}

TEST(Apriori, DominatesMeasuredError) {
  Rng rng(15);
  int available = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t r = 1 + rng.index(3);
    const Mat W = random_rank(6, 6, r, rng) + [&] {
      Mat N = random_mat(6, 6, rng);
      N *= 1e-4;
      return N;
    }();
    const std::size_t k = r + rng.index(6 - r + 1), l = r + rng.index(6 - r + 1);
    const IndexSet I(rng.sample_without_replacement(6, k), 6), J(rng.sample_without_replacement(6, l), 6);
    const auto cur = canonical(W, I, J, r);
    for (auto kind : {NormKind::spectral, NormKind::frobenius}) {
      const auto e = dense_error(W, cur, kind, true);
      const auto b = apriori_error_bound(cur, W, *e.sigma_tail, kind);
      if (!b.available) continue;
      ++available;
      EXPECT_LE(e.absolute, b.value * (1 + 1e-12));
    }
  }
  EXPECT_GT(available, 100);
}

TEST(Posterior, ExactDecompositionHasZeroError) {
  Rng rng(16);
  const Mat W = random_rank(40, 30, 3, rng);
  const auto cur = canonical(W, IndexSet::range(3, 40), IndexSet::range(3, 30), 3);
  const auto p = posterior_error_sampled(W, cur, 10, 10, rng);
  EXPECT_LT(std::sqrt(p.variance), 1e-10);
  EXPECT_LT(p.frobenius_estimate, 1e-8);
  EXPECT_FALSE(p.within_tolerance.has_value());
  EXPECT_THROW(posterior_error_sampled(W, cur, 9, 11, rng), ArgumentError);
  EXPECT_THROW(posterior_error_sampled(W, cur, 41, 10, rng), ArgumentError);
}

TEST(Posterior, EntriesTouchedStaySmall) {
  Rng rng(17);
  const Mat W = random_rank(200, 200, 4, rng);
  const auto cur = canonical(W, IndexSet::range(4, 200), IndexSet::range(4, 200), 4);
  EntrySource<double> src(W);
  posterior_error_sampled(src, cur, 20, 20, rng);
  EXPECT_EQ(src.touched(), 20u * 20 + 20 * 4 + 4 * 20);
}

namespace {

// W = CUR + noise with the noise kept off rows I and columns J, so the
// sampled error equals the noise wherever the grid avoids them.
struct NoisyCase {
  Mat W, E;
  CurLra<double> cur;
};

NoisyCase noisy_case(Rng& rng, std::size_t m, std::size_t n, std::size_t r, double scale) {
  NoisyCase c;
  const Mat W0 = random_rank(m, n, r, rng);
  const IndexSet I = IndexSet::range(r, m), J = IndexSet::range(r, n);
  c.cur = canonical(W0, I, J, r);
  c.E = Mat(m, n);
  for (std::size_t i = r; i < m; ++i)
    for (std::size_t j = r; j < n; ++j) c.E(i, j) = scale * rng.normal();
  c.W = W0 + c.E;
  return c;
}

}  // namespace

TEST(Posterior, VarianceConcentrates) {
  int inside = 0;
  const int seeds = 200;
  for (int t = 0; t < seeds; ++t) {
    Rng rng(1000 + t);
    const auto c = noisy_case(rng, 200, 200, 4, 1e-6);
    const auto p = posterior_error_sampled(c.W, c.cur, 20, 20, rng);
    inside += p.variance >= 0.5e-12 && p.variance <= 2.0e-12;
  }
  EXPECT_GE(inside, seeds * 99 / 100);
}

TEST(Posterior, FrobeniusExtrapolationWithinFactorTwo) {
  for (int t = 0; t < 50; ++t) {
    Rng rng(2000 + t);
    const auto c = noisy_case(rng, 150, 120, 3, 1e-6);
    const auto p = posterior_error_sampled(c.W, c.cur, 20, 20, rng);
    // Oracle: the exact noise we injected.
    const double truth = std::sqrt(frobenius2(c.E));
    EXPECT_GT(p.frobenius_estimate, truth / 2);
    EXPECT_LT(p.frobenius_estimate, truth * 2);
  }
}

TEST(Posterior, ChiSquareFlagsExcessVariance) {
  Rng rng(18);
  const auto c = noisy_case(rng, 120, 120, 3, 1e-6);
  const auto ok = posterior_error_sampled(c.W, c.cur, 20, 20, rng, 1e-12, 0.01);
  ASSERT_TRUE(ok.within_tolerance.has_value());
  EXPECT_TRUE(*ok.within_tolerance);
  const auto bad = posterior_error_sampled(c.W, c.cur, 20, 20, rng, 1e-13, 0.01);
  EXPECT_FALSE(*bad.within_tolerance);
  EXPECT_GT(bad.statistic, bad.threshold);
}

TEST(Md09, ExactOnRankRAndIdentity) {
  Rng rng(19);
  for (int t = 0; t < 20; ++t) {
    const Mat W = random_rank(30, 25, 4, rng);
    const auto J = rng.sample_without_replacement(25, 6), I = rng.sample_without_replacement(30, 5);
    const Mat C = W.select_cols(J), R = W.select_rows(I);
    const Mat U = nucleus_md09(W, C, R);
    EXPECT_LT(rel_diff(matmul(matmul(C, U), R), W), 1e-9);
    EXPECT_LT(rel_diff(U, matmul(matmul(eigen_pinv(C), W), eigen_pinv(R))), 1e-7);
  }
  const Mat Id = Mat::identity(4);
  EXPECT_LT(rel_diff(nucleus_md09(Id, Id, Id), Id), 1e-14);
  EXPECT_THROW(nucleus_md09(Id, Mat(3, 2), Id), ArgumentError);
}

TEST(Md09, CorridorAgainstCanonical) {
  Rng rng(20);
  for (int t = 0; t < 20; ++t) {
    FactorGaussianSpec s;
    s.m = s.n = 40;
    s.r = 4;
    s.eps = 1e-6;
    const Mat W = gen_factor_gaussian(s, rng).W;
    const IndexSet I(rng.sample_without_replacement(40, 8), 40), J(rng.sample_without_replacement(40, 8), 40);
    const auto cur = canonical(W, I, J, 4);
    const Mat C = W.select_cols(J.indices()), R = W.select_rows(I.indices());
    const double e_can = std::sqrt(frobenius2(W - reconstruct(cur, W)));
    const double e_md = std::sqrt(frobenius2(W - matmul(matmul(C, nucleus_md09(W, C, R)), R)));
    EXPECT_LE(e_md, 10 * e_can);
    EXPECT_LE(e_can, 10 * e_md);
  }
}

TEST(Serialization, RoundTripAndErrors) {
  Rng rng(21);
  const Mat W = random_rank(10, 9, 2, rng);
  const auto cur = canonical(W, iset({1, 4, 7}, 10), iset({0, 8}, 9), 2);
  std::stringstream ss;
  write_cur(ss, cur);
  EXPECT_EQ(std::get<CurLra<double>>(read_cur(ss)), cur);

  CurLra<cplx> cc{IndexSet::range(1, 3), IndexSet::range(1, 2), CMat{{cplx(1, -2)}}, 1, 3, 2};
  std::stringstream cs;
  write_cur(cs, cc);
  EXPECT_EQ(std::get<CurLra<cplx>>(read_cur(cs)), cc);

  std::istringstream bad("%%CurLra real\n10 9 2 3 2\nI 1 4 7\nJ 0 9\n1 2 3\n4 5 6\n");
  try {
    read_cur(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 4u);
  }
  std::istringstream shortrow("%%CurLra real\n3 3 1 1 1\nI 0\nJ 0\n");
  EXPECT_THROW(read_cur(shortrow), ParseError);
  std::istringstream nohead("junk\n");
  EXPECT_THROW(read_cur(nohead), ParseError);
}

TEST(CurLraType, ValidateRejectsBadShapes) {
  CurLra<double> c{IndexSet::range(2, 5), IndexSet::range(2, 5), Mat(2, 3), 2, 5, 5};
  EXPECT_THROW(c.validate(), ArgumentError);
  c.U = Mat(2, 2);
  EXPECT_NO_THROW(c.validate());
  c.r = 3;
  EXPECT_THROW(c.validate(), ArgumentError);
}
