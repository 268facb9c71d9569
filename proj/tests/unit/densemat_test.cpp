#include "pricing/densemat.hpp"

#include <random>

#include <gtest/gtest.h>

namespace pricing {
namespace {

Mat random_mat(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(rows, cols);
  for (double& v : a.data()) v = u(rng);
  return a;
}

// Diagonally dominant, so comfortably conditioned.
Mat well_conditioned(std::size_t n, std::mt19937_64& rng) {
  Mat a = random_mat(n, n, rng);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
  return a;
}

TEST(MatmulTest, IdentityAndZero) {
  const Mat a{{1, 2, 3}, {4, 5, 6}, {7, 8, 10}};
  EXPECT_EQ(matmul(Mat::identity(3), a), a);
  EXPECT_EQ(matmul(a, Mat(3, 2)), Mat(3, 2));
}

TEST(MatmulTest, HandExample) {
  EXPECT_EQ(matmul(Mat{{1, 2}, {3, 4}}, Mat{{1}, {1}}), (Mat{{3}, {7}}));
}

TEST(MatmulTest, DimensionMismatchThrows) {
  EXPECT_THROW(matmul(Mat(2, 3), Mat(2, 3)), MatError);
}

TEST(MatmulTest, Associative) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat a = random_mat(4, 5, rng);
    const Mat b = random_mat(5, 3, rng);
    const Mat c = random_mat(3, 6, rng);
    EXPECT_LE(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))), 1e-10);
  }
}

TEST(SolveTest, IdentityAndDiagonal) {
  const Mat b{{1.5}, {-2}};
  EXPECT_EQ(solve(Mat::identity(2), b), b);
  const Vec d{2, 4};
  EXPECT_LE(max_abs_diff(solve(diag_from(d), Mat{{2}, {4}}), Mat{{1}, {1}}), 1e-15);
}

TEST(SolveTest, RoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const Mat a = well_conditioned(n, rng);
    const Mat x0 = random_mat(n, 3, rng);
    const Mat b = matmul(a, x0);
    const Mat x = solve(a, b);
    EXPECT_LT(max_abs_diff(x, x0), 1e-9);
    EXPECT_LE(max_abs_diff(matmul(a, x), b), 1e-9 * max_abs(b));
  }
}

TEST(SolveTest, SingularThrows) {
  try {
    solve(Mat{{1, 2}, {2, 4}}, Mat{{1}, {1}});
    FAIL() << "expected a singular system error";
  } catch (const MatError& e) {
    EXPECT_STREQ(e.what(), "singular system");
  }
  EXPECT_THROW(solve(Mat(2, 3), Mat(2, 1)), MatError);
}

TEST(SolveTest, VectorOverloadMatchesMatrix) {
  std::mt19937_64 rng(5);
  const Mat a = well_conditioned(5, rng);
  const Vec b{1, 2, 3, 4, 5};
  const Vec x = solve(a, b);
  EXPECT_LE(max_abs_diff(matvec(a, x), b), 1e-12);
}

TEST(InverseTest, ProductIsIdentity) {
  std::mt19937_64 rng(8);
  const Mat a = well_conditioned(6, rng);
  EXPECT_LE(max_abs_diff(matmul(a, inverse(a)), Mat::identity(6)), 1e-12);
}

TEST(QrTest, LeastSquaresMatchesNormalEquations) {
  std::mt19937_64 rng(21);
  const Mat a = random_mat(9, 4, rng);
  const Mat b = random_mat(9, 2, rng);
  const Mat x = QrFactor(a).solve_least_squares(b);
  const Mat at = transpose(a);
  EXPECT_LE(max_abs_diff(x, solve(matmul(at, a), matmul(at, b))), 1e-10);
}

TEST(QrTest, RankDeficientThrows) {
  EXPECT_THROW(QrFactor(Mat{{1, 2}, {2, 4}, {3, 6}}), MatError);
  EXPECT_THROW(QrFactor(Mat(2, 3)), MatError);
}

TEST(HelpersTest, Definitions) {
  EXPECT_EQ(diag_from(Vec{1, 2}), (Mat{{1, 0}, {0, 2}}));
  const Mat a{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(transpose(transpose(a)), a);
  EXPECT_EQ(transpose(a), (Mat{{1, 4}, {2, 5}, {3, 6}}));

  const Mat e = outer(basis(0, 3), basis(1, 3));
  EXPECT_EQ(e(0, 1), 1.0);
  EXPECT_EQ(max_abs(e), 1.0);
  double total = 0.0;
  for (double v : e.data()) total += v;
  EXPECT_EQ(total, 1.0);

  EXPECT_THROW(basis(3, 3), MatError);
  EXPECT_THROW(a.at(2, 0), MatError);
  EXPECT_THROW(a.col(3), MatError);
  EXPECT_THROW((Mat{{1, 2}, {3}}), MatError);
}

TEST(HelpersTest, MatvecTransposedAgreesWithTranspose) {
  std::mt19937_64 rng(2);
  const Mat a = random_mat(5, 3, rng);
  const Vec x{0.5, -1, 2, 0.25, 3};
  EXPECT_LE(max_abs_diff(matvec_transposed(a, x), matvec(transpose(a), x)), 1e-14);
}

TEST(HelpersTest, FromRowsChecksLength) {
  EXPECT_EQ(Mat::from_rows(2, 2, Vec{1, 2, 3, 4}), (Mat{{1, 2}, {3, 4}}));
  EXPECT_THROW(Mat::from_rows(2, 2, Vec{1, 2, 3}), MatError);
}

}  // namespace
}  // namespace pricing
