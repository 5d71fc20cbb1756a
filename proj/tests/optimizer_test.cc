#include "lqgopt/optimizer.h"

#include <cmath>

#include <gtest/gtest.h>

#include "lqgopt/bench.h"
#include "test_util.h"

namespace lqgopt {
namespace {

using test::RandomDirection;
using test::RandomInstance;
using test::RelErr;
using test::ScalarController;
using test::ScalarPlant;
using test::UnitE;

TEST(CertificateTest, ScalarFixtureValue) {
  // λmax(L(A_cl, I)) = (5 + √5)/16 and ‖Ê‖₂ = 1.
  const double s = StabilityCertificate(ScalarPlant(), ScalarController(), UnitE());
  EXPECT_NEAR(s, 8.0 / (5.0 + std::sqrt(5.0)), 1e-14);
  EXPECT_NEAR(s, 1.1055728090000836, 1e-12);
  // The exact stability boundary along E is t = 4; the certificate is a
  // conservative bound below it.
  EXPECT_LT(SpectralAbscissa(AssembleClosedLoop(ScalarPlant(),
                                                Retract(ScalarController(), UnitE(), 3.99))
                                 .A_cl),
            0.0);
  EXPECT_GE(SpectralAbscissa(AssembleClosedLoop(ScalarPlant(),
                                                Retract(ScalarController(), UnitE(), 4.0))
                                 .A_cl),
            -1e-12);
}

TEST(CertificateTest, SoundOnRandomDirections) {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [plant, K] = RandomInstance(1 + trial % 4, 2, 2, rng);
    const TangentDirection V = RandomDirection(K, 2, 2, rng);
    const double s = StabilityCertificate(plant, K, V);
    ASSERT_GT(s, 0.0);
    const Controller next = Retract(K, V, 0.99 * s);
    EXPECT_LT(SpectralAbscissa(AssembleClosedLoop(plant, next).A_cl), 0.0);
  }
}

TEST(CertificateTest, EdgeCases) {
  try {
    StabilityCertificate(ScalarPlant(), ScalarController(),
                         TangentDirection::Zero(1, 1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroDirection);
  }
  Controller unstable = ScalarController();
  unstable.A_K(0, 0) = 10.0;
  EXPECT_THROW(StabilityCertificate(ScalarPlant(), unstable, UnitE()), Error);
}

TEST(PerturbTest, RelativeMagnitude) {
  Rng rng(42);
  const Controller K{Matrix::Zero(3, 3), Matrix::Zero(3, 2), Matrix::Zero(2, 3)};
  const TangentDirection V = RandomDirection(K, 2, 2, rng);
  const TangentDirection P = PerturbDirection(V, 1e-3, rng);
  EXPECT_NEAR((P - V).Norm(), 1e-3 * V.Norm(), 1e-12 * V.Norm());
  EXPECT_EQ((PerturbDirection(V, 0.0, rng) - V).Norm(), 0.0);
}

TEST(LineSearchTest, FullStepWhenArmijoHolds) {
  const Plant plant = ScalarPlant();
  const Controller K = ScalarController();
  const TangentDirection g = EuclideanGradient(plant, K);
  Rng rng(0);
  OptimizerConfig config;
  const LineSearchResult r = BacktrackingLineSearch(
      plant, K, LqgCost(plant, K), -g, g.Dot(g), config, rng);
  EXPECT_GT(r.step, 0.0);
  EXPECT_LE(r.step, 1.0);
  EXPECT_LT(r.next_cost, LqgCost(plant, K));
  EXPECT_GE(LqgCost(plant, K) - r.next_cost, config.armijo * r.step * g.Dot(g));
}

TEST(LineSearchTest, AscentDirectionUnderflows) {
  const Plant plant = ScalarPlant();
  const Controller K = ScalarController();
  const TangentDirection g = EuclideanGradient(plant, K);
  Rng rng(0);
  try {
    BacktrackingLineSearch(plant, K, LqgCost(plant, K), g, g.Dot(g),
                           OptimizerConfig{}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStepSizeUnderflow);
  }
}

TEST(LineSearchTest, CertificateClampBoundsFirstTrial) {
  const Plant plant = ScalarPlant();
  const Controller K = ScalarController();
  Rng rng(0);
  OptimizerConfig config;
  config.certificate_clamp = true;
  config.initial_step = 100.0;
  // Descent along -E with a large initial step: without the clamp the first
  // trials destabilize; with it the first trial is already admissible.
  const LineSearchResult r = BacktrackingLineSearch(
      plant, K, LqgCost(plant, K), -1.0 * UnitE(), 1e-6, config, rng);
  EXPECT_LE(r.step, 0.99 * StabilityCertificate(plant, K, -1.0 * UnitE()) + 1e-15);
}

TEST(OptimizerTest, ScalarRgdReachesOracle) {
  const Plant plant = ScalarPlant();
  const RunTrace trace = RunRgd(plant, ScalarController(), OptimizerConfig{});
  EXPECT_EQ(trace.termination, Termination::kHaltGap);
  EXPECT_NEAR(trace.records.back().cost, 6 * std::sqrt(2.0) - 8, 1e-10);
  EXPECT_EQ(trace.records.front().iter, 0);
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    EXPECT_EQ(trace.records[i].iter, static_cast<int>(i));
    EXPECT_LT(trace.records[i].cost, trace.records[i - 1].cost);
    EXPECT_GT(trace.records[i - 1].step, 0.0);
  }
  EXPECT_EQ(trace.records.back().step, 0.0);
  EXPECT_TRUE(IsAdmissible(plant, trace.final_controller).admissible());
}

TEST(OptimizerTest, ScalarGdReachesOracle) {
  // The smallest Hessian eigenvalue is about 1.93e-3, so a Frobenius
  // gradient of 1e-6 still leaves a gap near 2.6e-10: GD stops on the
  // gradient test first. A tighter tolerance reaches the halting gap.
  const RunTrace trace = RunGd(ScalarPlant(), ScalarController(), OptimizerConfig{});
  EXPECT_EQ(trace.termination, Termination::kGradTol);
  EXPECT_LT(*trace.records.back().gap, 1e-9);
  OptimizerConfig tight;
  tight.grad_tol = 1e-8;
  const RunTrace halted = RunGd(ScalarPlant(), ScalarController(), tight);
  EXPECT_EQ(halted.termination, Termination::kHaltGap);
  EXPECT_LT(*halted.records.back().gap, 1e-10);
}

TEST(OptimizerTest, ZeroIterationBudget) {
  OptimizerConfig config;
  config.max_iters = 0;
  const RunTrace trace = RunRgd(ScalarPlant(), ScalarController(), config);
  EXPECT_EQ(trace.termination, Termination::kMaxIters);
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_NEAR(trace.records[0].cost, 0.625, 1e-15);
}

TEST(OptimizerTest, StationaryStart) {
  const Plant plant = ScalarPlant();
  OptimizerConfig config;
  config.halt_gap.reset();
  const RunTrace trace = RunRgd(plant, LqgRiccatiOptimum(plant).controller, config);
  EXPECT_EQ(trace.termination, Termination::kGradTol);
  EXPECT_LE(trace.records.size(), 2u);
}

TEST(OptimizerTest, OracleComputedWhenNotGiven) {
  OptimizerConfig config;
  config.max_iters = 3;
  const RunTrace trace = RunRgd(ScalarPlant(), ScalarController(), config);
  EXPECT_TRUE(trace.records[0].gap.has_value());
  EXPECT_NEAR(*trace.optimal_cost, 6 * std::sqrt(2.0) - 8, 1e-13);
}

TEST(OptimizerTest, InadmissibleStartRejected) {
  Controller K = ScalarController();
  K.B_K.setZero();
  try {
    RunRgd(ScalarPlant(), K, OptimizerConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInadmissibleStart);
  }
}

TEST(OptimizerTest, ConfigValidation) {
  OptimizerConfig c;
  c.armijo = 1.0;
  EXPECT_THROW(c.Validate(), Error);
  c = OptimizerConfig{};
  c.backtrack = 0.0;
  EXPECT_THROW(c.Validate(), Error);
  c = OptimizerConfig{};
  c.max_iters = -1;
  EXPECT_THROW(c.Validate(), Error);
  c = OptimizerConfig{};
  c.initial_step = 0.0;
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_EQ(ParseAlgorithm("rgd"), Algorithm::kRgd);
  EXPECT_EQ(ParseAlgorithm("GD"), Algorithm::kGd);
  EXPECT_THROW(ParseAlgorithm("newton"), Error);
}

TEST(OptimizerTest, DeterministicForFixedSeed) {
  Rng rng(43);
  const auto [plant, K] = RandomInstance(3, 2, 2, rng);
  OptimizerConfig config;
  config.max_iters = 30;
  config.seed = 9;
  const RunTrace a = RunRgd(plant, K, config);
  const RunTrace b = RunRgd(plant, K, config);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].cost, b.records[i].cost);
    EXPECT_EQ(a.records[i].step, b.records[i].step);
    EXPECT_EQ(a.records[i].grad_norm, b.records[i].grad_norm);
  }
}

TEST(OptimizerTest, RgdIteratesCorrespondUnderCoordinateChange) {
  Rng rng(44);
  const auto [plant, K0] = RandomInstance(3, 2, 2, rng);
  const Matrix S = test::RandomConditioned(3, 1e3, rng);
  OptimizerConfig config;
  config.max_iters = 5;
  config.halt_gap.reset();
  config.algorithm = Algorithm::kRgd;
  const RunTrace a = RunOptimizer(plant, K0, config);
  const RunTrace b = RunOptimizer(plant, CoordinateTransform(K0, S), config);
  ASSERT_EQ(a.records.size(), b.records.size());
  const Controller mapped = CoordinateTransform(a.final_controller, S);
  EXPECT_LT(RelErr(mapped.Block(), b.final_controller.Block()), 1e-6);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_LT(RelErr(a.records[i].cost, b.records[i].cost), 1e-6);
  }

  config.algorithm = Algorithm::kGd;
  const RunTrace c = RunOptimizer(plant, K0, config);
  const RunTrace d = RunOptimizer(plant, CoordinateTransform(K0, S), config);
  const Controller gd_mapped = CoordinateTransform(c.final_controller, S);
  EXPECT_GT(RelErr(gd_mapped.Block(), d.final_controller.Block()), 1e-3);
}

TEST(InitTest, PlacesPolesInSpan) {
  Rng rng(45);
  for (int trial = 0; trial < 10; ++trial) {
    const Plant plant = GenerateRandomPlant(3, 2, 2, 0.8, rng);
    const Controller K = RandomMinimalInit(plant, rng);
    EXPECT_TRUE(IsAdmissible(plant, K).admissible());
    // Separation: the closed loop spectrum is the union of the state
    // feedback and observer poles, all drawn in (-2, -1).
    for (const auto& lambda : Eigenvalues(AssembleClosedLoop(plant, K).A_cl)) {
      EXPECT_NEAR(lambda.imag(), 0.0, 1e-6);
      EXPECT_GT(lambda.real(), -2.0 - 1e-6);
      EXPECT_LT(lambda.real(), -1.0 + 1e-6);
    }
  }
}

TEST(InitTest, SeedDeterminesController) {
  const Plant plant = ScalarPlant();
  Rng a(5), b(5);
  EXPECT_EQ(RandomMinimalInit(plant, a).Block(), RandomMinimalInit(plant, b).Block());
}

}  // namespace
}  // namespace lqgopt
