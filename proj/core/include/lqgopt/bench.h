#pragma once

// Benchmark systems and the comparison harness: random plant family, the
// GD / RGD(1,1,1) / RGD(1,0,0) comparison on a shared initial controller,
// and the finite-difference Hessian signature check at the LQG optimum.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lqgopt/optimizer.h"

namespace lqgopt {

struct BenchmarkSystem {
  std::string name;
  Plant plant;
  std::string provenance;
  std::optional<double> known_cost;
};

struct RandomPlantSpec {
  int n = 4;
  int m = 3;
  int p = 3;
  /// Probability that an entry of A, B or C is drawn from N(0,1) rather
  /// than set to zero.
  double density = 0.8;
  // Identity unless given.
  std::optional<Matrix> W, V, Q, R;
};

/// Resamples (up to 50 draws) until the plant assumptions hold; throws
/// kGenerationFailure otherwise.
Plant GenerateRandomPlant(const RandomPlantSpec& spec, Rng& rng);
Plant GenerateRandomPlant(int n, int m, int p, double density, Rng& rng);

/// Generator for member `index` of a seeded family.
Rng FamilyRng(std::uint64_t seed, std::uint64_t index);

/// One optimizer variant in a comparison.
struct ExperimentMethod {
  std::string label;
  Algorithm algorithm = Algorithm::kRgd;
  MetricWeights weights;
};

/// GD, RGD with w = (1,1,1), RGD with w = (1,0,0).
std::vector<ExperimentMethod> DefaultMethods();

inline constexpr double kComparisonGap = 1e-6;

struct SummaryRow {
  std::string system;
  std::string algorithm;
  std::optional<int> iters_to_target;  // first iteration with gap ≤ 1e-6
  std::optional<double> final_gap;
  double wall_ms = 0.0;
  std::optional<Termination> termination;
  std::string error;
};

struct ExperimentRun {
  std::string system;
  std::string method;
  std::optional<RunTrace> trace;  // empty when the run failed to start
};

struct ExperimentResult {
  std::vector<SummaryRow> summary;        // ordered by (system, method)
  std::vector<ExperimentRun> runs;        // aligned with summary
  std::vector<std::optional<Controller>> initial_controllers;  // per system
};

/// First iteration whose gap is ≤ target.
std::optional<int> IterationsToGap(const RunTrace& trace,
                                   double target = kComparisonGap);

/// Runs every method on every system from one initial controller per system,
/// drawn by RandomMinimalInit with FamilyRng(base.seed, system index).
/// Failures are recorded in the summary row and never abort the suite.
ExperimentResult RunExperiment(std::span<const BenchmarkSystem> suite,
                               const OptimizerConfig& base,
                               std::span<const ExperimentMethod> methods);

/// Median of iteration counts, where runs that never reached the target
/// count as max_iters + 1.
double MedianIterations(std::span<const std::optional<int>> iters,
                        int max_iters);

/// Central-difference Hessian of J over the canonical frame, built from
/// Euclidean gradients at K ± h E_j, then symmetrized. Requires a spectral
/// abscissa below -10h (kNotStabilizing otherwise).
Matrix FiniteDifferenceHessian(const Plant& plant, const Controller& K,
                               double h);

struct SignatureReport {
  Vector eigenvalues;  // ascending
  int negative = 0;
  int zero = 0;
  int positive = 0;
  int dimension = 0;   // N
  int orbit_dimension = 0;  // n²
};

/// Counts eigenvalues of H with |λ| ≤ zero_tol · max|λ| as zero.
SignatureReport ClassifySignature(const Matrix& H, double zero_tol);

/// Signature of the finite-difference Hessian at the Riccati optimum with
/// step h = h_factor · (1 + ‖K*‖_F). Throws kNotMinimal if K* is not minimal.
SignatureReport HessianSignatureCheck(const Plant& plant,
                                      double h_factor = 1e-4,
                                      double zero_tol = 1e-6);

}  // namespace lqgopt
