#include "lqgopt/matlin.h"

#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"

namespace lqgopt {
namespace {

using test::Gaussian;
using test::RandomHurwitz;
using test::RandomSpd;

double LyapunovResidual(const Matrix& A, const Matrix& P, const Matrix& Q) {
  return (A * P + P * A.transpose() + Q).norm();
}

TEST(LyapunovTest, UpperTriangularExample) {
  Matrix A(2, 2);
  A << -1, 1, 0, -1;
  Matrix expected(2, 2);
  expected << 0.75, 0.25, 0.25, 0.5;
  const Matrix P = SolveLyapunov(A, Matrix::Identity(2, 2));
  EXPECT_LT((P - expected).norm(), 1e-14);
}

TEST(LyapunovTest, ScalarIsQOverTwoAlpha) {
  const Matrix P = SolveLyapunov(Matrix::Constant(1, 1, -2.0),
                                 Matrix::Constant(1, 1, 3.0));
  EXPECT_NEAR(P(0, 0), 0.75, 1e-15);
}

TEST(LyapunovTest, RoutesAgreeAndMeetResidualContract) {
  Rng rng(11);
  for (int k = 1; k <= 10; ++k) {
    const Matrix A = RandomHurwitz(k, rng);
    const Matrix Q = RandomSpd(k, rng);
    const Matrix Pk = SolveLyapunovKronecker(A, Q);
    const Matrix Ps = SolveLyapunovSchur(A, Q);
    const double bound = 1e-10 * std::max(1.0, Q.norm());
    EXPECT_LE(LyapunovResidual(A, Pk, Q), bound) << "k=" << k;
    EXPECT_LE(LyapunovResidual(A, Ps, Q), bound) << "k=" << k;
    EXPECT_LT(test::RelErr(Pk, Ps), 1e-10) << "k=" << k;
    EXPECT_EQ(Pk, Pk.transpose());
  }
}

TEST(LyapunovTest, LargeSize) {
  Rng rng(12);
  const int k = 25;
  const Matrix A = RandomHurwitz(k, rng);
  const Matrix Q = RandomSpd(k, rng);
  const Matrix P = SolveLyapunov(A, Q);
  EXPECT_LE(LyapunovResidual(A, P, Q), 1e-10 * std::max(1.0, Q.norm()));
  EXPECT_TRUE(IsPositiveDefinite(P));
}

TEST(LyapunovTest, ZeroForcingGivesZero) {
  Rng rng(13);
  const Matrix A = RandomHurwitz(4, rng);
  EXPECT_EQ(SolveLyapunov(A, Matrix::Zero(4, 4)).norm(), 0.0);
}

TEST(LyapunovTest, RejectsNonHurwitz) {
  Matrix A(2, 2);
  A << 0.1, 1, 0, -1;
  try {
    SolveLyapunov(A, Matrix::Identity(2, 2));
    FAIL() << "expected kNotHurwitz";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotHurwitz);
  }
  EXPECT_THROW(SolveLyapunov(Matrix::Zero(1, 1), Matrix::Identity(1, 1)),
               Error);
}

TEST(LyapunovTest, RejectsNonFiniteInput) {
  Matrix A = -Matrix::Identity(2, 2);
  A(0, 1) = std::nan("");
  EXPECT_THROW(SolveLyapunov(A, Matrix::Identity(2, 2)), Error);
}

TEST(LyapunovTest, DifferentialMatchesCentralDifference) {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2 + trial % 4;
    const Matrix A = RandomHurwitz(k, rng);
    const Matrix Q = RandomSpd(k, rng);
    const Matrix V = Gaussian(k, k, rng);
    const Matrix W = Symmetrize(Gaussian(k, k, rng));
    const double h = 1e-6;
    const Matrix fd = (SolveLyapunov(A + h * V, Q + h * W) -
                       SolveLyapunov(A - h * V, Q - h * W)) /
                      (2 * h);
    EXPECT_LT(test::RelErr(LyapunovDifferential(A, Q, V, W), fd), 1e-6);
  }
}

TEST(KalmanTest, ControllabilityAndObservability) {
  Matrix A(2, 2);
  A << 1, 1, 0, 1;
  Matrix b(2, 1);
  b << 0, 1;
  Matrix c(1, 2);
  c << 1, 0;
  EXPECT_TRUE(IsControllable(A, b));
  EXPECT_TRUE(IsObservable(A, c));
  // Input only reaches the first (decoupled) mode.
  const Matrix D = Eigen::Vector2d(-1, -2).asDiagonal();
  Matrix e1(2, 1);
  e1 << 1, 0;
  EXPECT_FALSE(IsControllable(D, e1));
  EXPECT_FALSE(IsObservable(D, e1.transpose()));
  EXPECT_EQ(ControllabilityMatrix(A, b).cols(), 2);
  EXPECT_EQ(ObservabilityMatrix(A, c).rows(), 2);
}

TEST(KalmanTest, MarginUsesRelativeTolerance) {
  RankMargin m{1e-9, 1e3};
  EXPECT_FALSE(m.FullRank(1e-8));
  m.min_sv = 2e-5;
  EXPECT_TRUE(m.FullRank(1e-8));
}

TEST(DefinitenessTest, SemidefiniteAndDefinite) {
  Matrix psd(2, 2);
  psd << 1, 1, 1, 1;
  EXPECT_TRUE(IsPositiveSemidefinite(psd));
  EXPECT_FALSE(IsPositiveDefinite(psd));
  Matrix indef(2, 2);
  indef << 1, 0, 0, -1e-3;
  EXPECT_FALSE(IsPositiveSemidefinite(indef));
  EXPECT_TRUE(IsPositiveDefinite(Matrix::Identity(3, 3)));
  Matrix skew(2, 2);
  skew << 1, 0.5, 0.4, 1;
  EXPECT_FALSE(IsSymmetric(skew));
  EXPECT_TRUE(IsSymmetric(Symmetrize(skew)));
}

TEST(DefinitenessTest, PsdSqrtSquaresBack) {
  Rng rng(15);
  const Matrix M = Gaussian(4, 2, rng);
  const Matrix S = M * M.transpose();
  const Matrix R = PsdSqrt(S);
  EXPECT_LT((R * R - S).norm(), 1e-12 * S.norm());
  EXPECT_TRUE(IsSymmetric(R));
}

TEST(CareTest, ScalarSolution) {
  const Matrix one = Matrix::Constant(1, 1, 1.0);
  const Matrix P = SolveCare(-one, one, one, one);
  EXPECT_NEAR(P(0, 0), std::sqrt(2.0) - 1.0, 1e-14);
  // Unstable open loop: P = 1 + sqrt(2) for A = 1.
  EXPECT_NEAR(SolveCare(one, one, one, one)(0, 0), 1.0 + std::sqrt(2.0),
              1e-13);
}

TEST(CareTest, RandomResidualAndStability) {
  Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 4;
    const int m = 1 + trial % 3;
    const Matrix A = Gaussian(n, n, rng);
    const Matrix B = Gaussian(n, m, rng);
    const Matrix Q = RandomSpd(n, rng);
    const Matrix R = RandomSpd(m, rng);
    const Matrix P = SolveCare(A, B, Q, R);
    const Matrix res = A.transpose() * P + P * A -
                       P * B * R.ldlt().solve(B.transpose()) * P + Q;
    EXPECT_LE(res.norm(), 1e-10 * std::max(1.0, Q.norm())) << trial;
    EXPECT_TRUE(IsPositiveDefinite(P));
    const Matrix F = R.ldlt().solve(B.transpose() * P);
    EXPECT_LT(SpectralAbscissa(A - B * F), 0.0);
  }
}

TEST(CareTest, UnstabilizableThrows) {
  const Matrix A = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  Matrix B(2, 1);
  B << 0, 1;
  EXPECT_THROW(SolveCare(A, B, Matrix::Identity(2, 2), Matrix::Identity(1, 1)),
               Error);
}

TEST(SpdSolveTest, SolvesAndRejectsIndefinite) {
  Rng rng(17);
  const Matrix G = RandomSpd(5, rng);
  const Vector d = Gaussian(5, 1, rng);
  EXPECT_LT((G * SpdSolve(G, d) - d).norm(), 1e-12 * d.norm());
  try {
    SpdSolve(-G, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotPositiveDefinite);
  }
}

TEST(PlacePolesTest, RealAndComplexTargets) {
  Rng rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const int m = 1 + trial % 2;
    const Matrix A = Gaussian(n, n, rng);
    const Matrix B = Gaussian(n, m, rng);
    std::vector<std::complex<double>> poles;
    if (n >= 2 && trial % 2 == 0) {
      poles = {{-1.0, 2.0}, {-1.0, -2.0}};
    }
    while (static_cast<int>(poles.size()) < n) {
      poles.emplace_back(-1.0 - 0.5 * static_cast<double>(poles.size()), 0.0);
    }
    const Matrix F = PlacePoles(A, B, poles, rng);
    EXPECT_TRUE(SpectraMatch(Eigenvalues(A - B * F), poles, 1e-6)) << trial;
  }
}

TEST(PlacePolesTest, UncontrollablePairFails) {
  Rng rng(19);
  const Matrix A = Eigen::Vector2d(-1.0, -2.0).asDiagonal();
  Matrix B(2, 1);
  B << 1, 0;
  const std::vector<std::complex<double>> poles{{-3.0, 0.0}, {-4.0, 0.0}};
  try {
    PlacePoles(A, B, poles, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPlacementFailure);
  }
}

TEST(SpectraTest, GreedyMatching) {
  const std::vector<std::complex<double>> a{{-1, 0}, {-2, 0}};
  const std::vector<std::complex<double>> b{{-2, 0}, {-1, 1e-9}};
  const std::vector<std::complex<double>> c{{-1, 0}, {-1, 0}};
  EXPECT_TRUE(SpectraMatch(a, b, 1e-6));
  EXPECT_FALSE(SpectraMatch(a, c, 1e-6));
}

}  // namespace
}  // namespace lqgopt
