#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "curlra/io.hpp"
#include "curlra/kernels.hpp"
#include "test_util.hpp"

using namespace curlra;
using curlra::testing::oracle_singular_values;
using curlra::testing::ortho_defect;
using curlra::testing::random_cmat;
using curlra::testing::random_mat;
using curlra::testing::rel_diff;

TEST(Norm, HandExamples) {
  const Mat I3 = Mat::identity(3);
  EXPECT_NEAR(norm(I3, NormKind::spectral), 1.0, 1e-14);
  EXPECT_NEAR(norm(I3, NormKind::frobenius), std::sqrt(3.0), 1e-14);
  const Mat w{{3, 4}};
  EXPECT_DOUBLE_EQ(norm(w, NormKind::frobenius), 5.0);
  EXPECT_DOUBLE_EQ(norm(w, NormKind::chebyshev), 4.0);
}

TEST(Norm, ChainHoldsOnRandomShapes) {
  Rng rng(11);
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 1 + rng.index(12), n = 1 + rng.index(12);
    const Mat W = random_mat(m, n, rng);
    const double c = norm(W, NormKind::chebyshev), s = norm(W, NormKind::spectral), f = norm(W, NormKind::frobenius);
    EXPECT_LE(c, s * (1 + 1e-12));
    EXPECT_LE(s, f * (1 + 1e-12));
    EXPECT_LE(f, std::sqrt(double(m * n)) * c * (1 + 1e-12));
  }
}

TEST(Svd, DiagonalAndRankOne) {
  auto s = svd(Mat{{2, 0}, {0, 1}});
  EXPECT_NEAR(s.sigma[0], 2, 1e-14);
  EXPECT_NEAR(s.sigma[1], 1, 1e-14);
  auto o = svd(Mat(2, 2, 1.0));
  EXPECT_NEAR(o.sigma[0], 2, 1e-14);
  EXPECT_NEAR(o.sigma[1], 0, 1e-14);
}

TEST(Svd, ReconstructionAndOrthonormality) {
  Rng rng(5);
  for (auto [m, n] : {std::pair{5, 3}, {3, 5}, {1, 7}, {7, 1}, {40, 40}, {64, 17}, {9, 30}}) {
    const Mat W = random_mat(m, n, rng);
    const auto s = svd(W);
    EXPECT_LE(rel_diff(reconstruct(s), W), 1e-12) << m << "x" << n;
    EXPECT_LE(ortho_defect(s.S), 1e-10);
    EXPECT_LE(ortho_defect(s.T), 1e-10);
    for (std::size_t j = 1; j < s.sigma.size(); ++j) EXPECT_GE(s.sigma[j - 1], s.sigma[j]);
  }
}

TEST(Svd, MatchesEigenOracle) {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 1 + rng.index(20), n = 1 + rng.index(20);
    const Mat W = random_mat(m, n, rng);
    const auto mine = singular_values(W);
    const auto ref = oracle_singular_values(W);
    ASSERT_EQ(mine.size(), ref.size());
    for (std::size_t j = 0; j < ref.size(); ++j) EXPECT_NEAR(mine[j], ref[j], 1e-12 * ref[0]);
  }
}

TEST(Svd, ComplexMatchesEigenOracle) {
  Rng rng(7);
  for (auto [m, n] : {std::pair{6, 4}, {4, 6}, {16, 16}, {1, 3}}) {
    const CMat W = random_cmat(m, n, rng);
    const auto s = svd(W);
    EXPECT_LE(rel_diff(reconstruct(s), W), 1e-12);
    EXPECT_LE(ortho_defect(s.S), 1e-10);
    EXPECT_LE(ortho_defect(s.T), 1e-10);
    const auto ref = oracle_singular_values(W);
    for (std::size_t j = 0; j < ref.size(); ++j) EXPECT_NEAR(s.sigma[j], ref[j], 1e-12 * ref[0]);
  }
}

TEST(Svd, RankDeficientAndGradedInputs) {
  Rng rng(8);
  const Mat L = curlra::testing::random_rank(30, 20, 3, rng);
  const auto s = svd(L);
  EXPECT_LE(rel_diff(reconstruct(s), L), 1e-12);
  EXPECT_LE(ortho_defect(s.S), 1e-10);
  EXPECT_LT(s.sigma[3], 1e-12 * s.sigma[0]);
  Mat G(6, 6);
  for (std::size_t i = 0; i < 6; ++i) G(i, i) = std::pow(10.0, -2.0 * i);
  const auto g = svd(G);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(g.sigma[i], std::pow(10.0, -2.0 * i), 1e-14);
  EXPECT_EQ(svd(Mat(3, 4)).sigma, std::vector<double>(3, 0.0));
}

TEST(Svd, JacobiFallbackAgrees) {
  Rng rng(9);
  const Mat W = random_mat(12, 7, rng);
  const auto a = svd(W), b = svd_jacobi(W);
  EXPECT_LE(rel_diff(reconstruct(b), W), 1e-12);
  EXPECT_LE(ortho_defect(b.S), 1e-10);
  for (std::size_t j = 0; j < 7; ++j) EXPECT_NEAR(a.sigma[j], b.sigma[j], 1e-12 * a.sigma[0]);
  const auto z = svd_jacobi(Mat{{1, 1}, {1, 1}, {0, 0}});
  EXPECT_LE(ortho_defect(z.S), 1e-10);
}

TEST(Svd, FrobeniusEqualsSigmaSum) {
  Rng rng(10);
  const Mat W = random_mat(13, 9, rng);
  double s2 = 0;
  for (double s : singular_values(W)) s2 += s * s;
  EXPECT_NEAR(s2, frobenius2(W), 1e-10 * frobenius2(W));
}

TEST(Truncate, ExamplesAndEckartYoung) {
  const Mat D{{3, 0, 0}, {0, 2, 0}, {0, 0, 1}};
  const auto t = truncate(svd(D), 2);
  EXPECT_EQ(t.sigma.size(), 2u);
  EXPECT_NEAR(t.sigma[1], 2, 1e-14);
  EXPECT_THROW(truncate(svd(D), 0), ArgumentError);
  EXPECT_THROW(truncate(svd(D), 4), ArgumentError);
  EXPECT_LE(rel_diff(reconstruct(truncate(svd(D), 3)), D), 1e-14);

  Rng rng(12);
  const Mat W = random_mat(6, 6, rng);
  const auto s = svd(W);
  for (std::size_t r = 1; r < 6; ++r) {
    const double res = norm(W - reconstruct(truncate(s, r)), NormKind::spectral);
    EXPECT_NEAR(res, s.sigma[r], 1e-9 * (1 + s.sigma[r]));
  }
}

TEST(Pinv, ExamplesAndPenrose) {
  const Mat P = pinv(Mat{{2, 0}, {0, 0}});
  EXPECT_NEAR(P(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(P(1, 1), 0.0, 1e-15);
  const Mat O = pinv(Mat(2, 2, 1.0));
  for (double x : O.storage()) EXPECT_NEAR(x, 0.25, 1e-15);
  EXPECT_EQ(pinv(Mat(3, 2)), Mat(2, 3));

  Rng rng(13);
  for (auto [m, n] : {std::pair{4, 6}, {6, 4}, {32, 32}, {20, 9}}) {
    const Mat W = random_mat(m, n, rng);
    const Mat X = pinv(W);
    EXPECT_LE(rel_diff(matmul(matmul(W, X), W), W), 1e-8);
    EXPECT_LE(rel_diff(matmul(matmul(X, W), X), X), 1e-8);
    const Mat WX = matmul(W, X), XW = matmul(X, W);
    EXPECT_LE(rel_diff(WX.adjoint(), WX), 1e-8);
    EXPECT_LE(rel_diff(XW.adjoint(), XW), 1e-8);
  }
}

TEST(NumericalRank, AbsoluteThreshold) {
  EXPECT_EQ(numerical_rank(Mat{{1, 0}, {0, 1e-8}}), 1u);
  EXPECT_EQ(numerical_rank(Mat(4, 3)), 0u);
  Rng rng(14);
  Mat W = curlra::testing::random_rank(64, 64, 4, rng);
  W += 1e-10 * random_mat(64, 64, rng);
  EXPECT_EQ(numerical_rank(W), 4u);
}

TEST(Volume, ExamplesAndDeterminant) {
  EXPECT_NEAR(volume(Mat::identity(2)), 1, 1e-14);
  EXPECT_NEAR(volume(Mat{{1, 2}, {3, 4}}), 2, 1e-13);
  Rng rng(15);
  for (std::size_t m = 1; m <= 8; ++m) {
    const Mat W = random_mat(m, m, rng);
    EXPECT_NEAR(volume(W), std::abs(determinant(W)), 1e-8 * std::abs(determinant(W)));
    EXPECT_NEAR(projective_volume(W, m), volume(W), 1e-12 * volume(W));
  }
  EXPECT_EQ(volume(Mat(2, 2)), 0.0);
}

TEST(Volume, ProductIdentityNeedsInnerDimensionMin) {
  Rng rng(16);
  // q = min(m, n): G 4x4, H 4x7 and G 7x3, H 3x3.
  for (auto [m, q, n] : {std::tuple{4, 4, 7}, {7, 3, 3}}) {
    const Mat G = random_mat(m, q, rng), H = random_mat(q, n, rng);
    EXPECT_NEAR(volume(matmul(G, H)), volume(G) * volume(H), 1e-8 * volume(G) * volume(H));
  }
  // q < min(m, n) gives a zero volume.
  EXPECT_LT(volume(matmul(random_mat(4, 3, rng), random_mat(3, 7, rng))), 1e-10);
  // The wider inner dimension of G 4x7, H 7x3 breaks the identity.
  const Mat G2 = random_mat(4, 7, rng), H2 = random_mat(7, 3, rng);
  EXPECT_GT(std::abs(volume(matmul(G2, H2)) - volume(G2) * volume(H2)), 1e-6 * volume(G2) * volume(H2));
}

TEST(PinvBound, Examples) {
  const Mat I2 = Mat::identity(2);
  EXPECT_TRUE(pinv_product_bound_check(I2, I2, I2));
  Rng rng(17);
  EXPECT_TRUE(pinv_product_bound_check(random_mat(5, 3, rng), random_mat(3, 3, rng), random_mat(3, 4, rng)));
  const Mat S{{1, 0}, {0, 1e-6}};
  EXPECT_TRUE(pinv_product_bound_check(random_mat(5, 2, rng), S, random_mat(2, 6, rng)));
  EXPECT_THROW(pinv_product_bound_check(Mat(5, 2), S, random_mat(2, 6, rng)), ArgumentError);
}

TEST(Qr, PivotedFactorization) {
  Rng rng(18);
  for (auto [m, n] : {std::pair{8, 5}, {5, 8}, {10, 10}}) {
    const Mat A = random_mat(m, n, rng);
    const auto f = qr_pivoted(A);
    EXPECT_LE(rel_diff(matmul(f.Q, f.R), A.select_cols(f.perm)), 1e-13);
    EXPECT_LE(ortho_defect(f.Q), 1e-12);
    for (std::size_t i = 1; i < f.R.rows(); ++i) EXPECT_GE(std::abs(f.R(i - 1, i - 1)), std::abs(f.R(i, i)));
  }
  const CMat C = random_cmat(6, 4, rng);
  const auto g = qr_pivoted(C);
  EXPECT_LE(rel_diff(matmul(g.Q, g.R), C.select_cols(g.perm)), 1e-13);
}

TEST(Lu, SolveAndInverse) {
  Rng rng(19);
  const Mat A = random_mat(7, 7, rng), B = random_mat(7, 3, rng);
  EXPECT_LE(rel_diff(matmul(A, solve(A, B)), B), 1e-12);
  EXPECT_LE(rel_diff(matmul(A, inverse(A)), Mat::identity(7)), 1e-12);
  EXPECT_THROW(solve(Mat(2, 2), Mat(2, 1)), NumericalFailure);
}

TEST(Kernels, ParallelMatchesReference) {
  Rng rng(20);
  const Mat A = random_mat(70, 50, rng), B = random_mat(50, 60, rng), A2 = random_mat(50, 70, rng);
  EXPECT_LE(rel_diff(kernels::gemm_parallel(A, B), kernels::gemm_reference(A, B)), 1e-15);
  EXPECT_LE(rel_diff(kernels::gemm_parallel(A2, B, kernels::Op::adjoint),
                     kernels::gemm_reference(A2, B, kernels::Op::adjoint)),
            1e-15);
  Mat X = random_mat(256, 9, rng), Y = X;
  kernels::butterfly_columns_reference(X, 4);
  kernels::butterfly_columns_parallel(Y, 4);
  EXPECT_EQ(X, Y);
  const Mat A3 = random_mat(70, 50, rng);
  EXPECT_NEAR(kernels::diff_frobenius2_parallel(A, A3), kernels::diff_frobenius2_reference(A, A3),
              1e-12 * kernels::diff_frobenius2_reference(A, A3));
}

TEST(IndexSetTest, Validation) {
  EXPECT_NO_THROW(IndexSet({0, 2, 5}, 6));
  EXPECT_THROW(IndexSet({2, 2}, 6), ArgumentError);
  EXPECT_THROW(IndexSet({3, 1}, 6), ArgumentError);
  EXPECT_THROW(IndexSet({6}, 6), ArgumentError);
  EXPECT_EQ(IndexSet::from_unsorted({4, 1, 4}, 5).indices(), (std::vector<std::size_t>{1, 4}));
}

namespace {
std::filesystem::path tmpfile(const std::string& name) { return std::filesystem::temp_directory_path() / name; }
}  // namespace

TEST(Io, MatrixMarketArrayAndCoordinate) {
  const auto p = tmpfile("curlra_array.mtx");
  {
    std::ofstream f(p);
    f << "%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n3\n2\n4\n";
  }
  const auto A = std::get<Mat>(load_matrix(p.string()));
  EXPECT_EQ(A, (Mat{{1, 2}, {3, 4}}));

  const auto q = tmpfile("curlra_coord.mtx");
  {
    std::ofstream f(q);
    f << "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1.5\n1 1 2.5\n3 2 -1\n";
  }
  const auto B = std::get<Mat>(load_matrix(q.string()));
  EXPECT_DOUBLE_EQ(B(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(B(2, 1), -1.0);

  const auto s = tmpfile("curlra_sym.mtx");
  {
    std::ofstream f(s);
    f << "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n2 1 7\n";
  }
  const auto S = std::get<Mat>(load_matrix(s.string()));
  EXPECT_DOUBLE_EQ(S(0, 1), 7.0);
  EXPECT_DOUBLE_EQ(S(1, 0), 7.0);
}

TEST(Io, ParseErrorsCarryLineNumbers) {
  const auto p = tmpfile("curlra_bad.mtx");
  {
    std::ofstream f(p);
    f << "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3\n";
  }
  try {
    load_matrix(p.string());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 3u);
  }
  const auto big = tmpfile("curlra_big.mtx");
  {
    std::ofstream f(big);
    f << "%%MatrixMarket matrix array real general\n100000 100000\n";
  }
  EXPECT_THROW(load_matrix(big.string()), ParseError);
}

TEST(Io, RoundTrips) {
  Rng rng(21);
  const Mat A = random_mat(5, 3, rng);
  const CMat C = random_cmat(2, 4, rng);
  for (auto fmt : {MatrixFormat::mm_array, MatrixFormat::mm_coordinate, MatrixFormat::binary}) {
    const auto p = tmpfile("curlra_rt.dat");
    save_matrix(p.string(), A, fmt);
    EXPECT_EQ(std::get<Mat>(load_matrix(p.string())), A);
    save_matrix(p.string(), C, fmt);
    EXPECT_EQ(std::get<CMat>(load_matrix(p.string())), C);
  }
}
