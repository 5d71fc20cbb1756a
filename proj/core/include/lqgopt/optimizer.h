#pragma once

// First-order LQG policy optimization over minimal full-order controllers:
// Riemannian gradient descent under the KM metric, plain gradient descent as
// a baseline, and the shared backtracking line search.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lqgopt/geometry.h"

namespace lqgopt {

enum class Algorithm { kRgd, kGd };

enum class Termination { kGradTol, kHaltGap, kMaxIters, kStepUnderflow, kError };

std::string_view ToString(Algorithm algorithm);
std::string_view ToString(Termination termination);

/// Accepts "RGD"/"GD" (case-insensitive). Throws kInvalidArgument otherwise.
Algorithm ParseAlgorithm(std::string_view name);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::kRgd;
  MetricWeights weights;
  int max_iters = 10000;                       // T
  double grad_tol = 1e-6;                      // ε
  double armijo = 0.01;                        // γ ∈ (0,1)
  double backtrack = 0.5;                      // β ∈ (0,1)
  double initial_step = 1.0;                   // s̄ > 0
  std::optional<double> halt_gap = 1e-10;      // stop once J - J* < halt_gap
  std::uint64_t seed = 0;
  double perturb_scale = 1e-8;                 // η
  /// Clamp the first trial step to 0.99 of the stability certificate.
  bool certificate_clamp = false;

  /// Throws kInvalidArgument when a field is out of range.
  void Validate() const;
};

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;     // KM norm for RGD, Frobenius for GD
  double step = 0.0;          // step accepted from this iterate; 0 on the last
  std::optional<double> gap;  // cost - J*, when the optimum is known
  double wall_ms = 0.0;       // monotonic time since the run started
};

struct RunTrace {
  Algorithm algorithm = Algorithm::kRgd;
  std::vector<IterationRecord> records;
  Termination termination = Termination::kError;
  std::string message;
  Controller initial_controller;
  Controller final_controller;
  std::optional<double> optimal_cost;
};

/// Step bound 1 / (2 ‖dA_cl(V)‖₂ λ_max(L(A_cl(K), I))): K + tV stays
/// stabilizing for t in [0, s). Returns +inf when dA_cl(V) = 0.
/// Throws kNotStabilizing, or kZeroDirection for V = 0.
double StabilityCertificate(const Plant& plant, const Controller& K,
                            const TangentDirection& V);

/// V + η‖V‖_F N with N a standard Gaussian direction normalized to unit
/// Frobenius norm.
TangentDirection PerturbDirection(const TangentDirection& V, double eta,
                                  Rng& rng);

struct LineSearchResult {
  double step = 0.0;
  Controller next;
  double next_cost = 0.0;
  TangentDirection direction;  // V, or its perturbation if one was needed
  int halvings = 0;
  int perturbations = 0;
};

/// Backtracking from s̄: shrink s ← βs until K + sV is stabilizing and
/// minimal and J(K) - J(K + sV) ≥ γ s norm_sq. A stabilizing but non-minimal
/// trial point is retried with up to 10 perturbed directions before halving.
/// Non-finite or failed cost evaluations count as inadmissible.
/// Throws kStepSizeUnderflow after 100 halvings.
LineSearchResult BacktrackingLineSearch(const Plant& plant, const Controller& K,
                                        double cost, const TangentDirection& V,
                                        double norm_sq,
                                        const OptimizerConfig& config,
                                        Rng& rng);

/// Runs RGD or GD according to config.algorithm. When `optimal_cost` is not
/// given it is computed from the Riccati oracle (gaps stay empty if that
/// fails). Throws kInadmissibleStart when K0 is not stabilizing and minimal.
RunTrace RunOptimizer(const Plant& plant, const Controller& K0,
                      const OptimizerConfig& config,
                      std::optional<double> optimal_cost = std::nullopt);

/// RunOptimizer with the algorithm forced to RGD / GD.
RunTrace RunRgd(const Plant& plant, const Controller& K0,
                const OptimizerConfig& config,
                std::optional<double> optimal_cost = std::nullopt);
RunTrace RunGd(const Plant& plant, const Controller& K0,
               const OptimizerConfig& config,
               std::optional<double> optimal_cost = std::nullopt);

/// Observer-based full-order controller with state-feedback and observer
/// poles drawn i.i.d. uniform in (-2, -1). Resamples until admissible (20
/// attempts), then throws kInitFailure.
Controller RandomMinimalInit(const Plant& plant, Rng& rng);

}  // namespace lqgopt
