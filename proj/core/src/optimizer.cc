#include "lqgopt/optimizer.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace lqgopt {

std::string_view ToString(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kRgd: return "RGD";
    case Algorithm::kGd: return "GD";
  }
  return "?";
}

std::string_view ToString(Termination termination) {
  switch (termination) {
    case Termination::kGradTol: return "GradTol";
    case Termination::kHaltGap: return "HaltGap";
    case Termination::kMaxIters: return "MaxIters";
    case Termination::kStepUnderflow: return "StepUnderflow";
    case Termination::kError: return "Error";
  }
  return "?";
}

Algorithm ParseAlgorithm(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "RGD") return Algorithm::kRgd;
  if (upper == "GD") return Algorithm::kGd;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown algorithm '" + std::string(name) + "'");
}

void OptimizerConfig::Validate() const {
  weights.Validate();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (max_iters < 0) fail("T must be >= 0");
  if (!(grad_tol >= 0.0)) fail("eps must be >= 0");
  if (!(armijo > 0.0 && armijo < 1.0)) fail("gamma must lie in (0,1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) fail("beta must lie in (0,1)");
  if (!(initial_step > 0.0) || !std::isfinite(initial_step)) {
    fail("sbar must be > 0");
  }
  if (halt_gap && !(*halt_gap >= 0.0)) fail("halt_gap must be >= 0");
  if (!(perturb_scale >= 0.0)) fail("perturb_scale must be >= 0");
}

double StabilityCertificate(const Plant& plant, const Controller& K,
                            const TangentDirection& V) {
  CheckDimensions(plant, K);
  if (V.IsZero()) {
    throw Error(ErrorCode::kZeroDirection, "certificate needs V != 0");
  }
  const ClosedLoop cl = AssembleClosedLoop(plant, K);
  Matrix P;
  try {
    P = SolveLyapunov(cl.A_cl, Matrix::Identity(cl.A_cl.rows(),
                                                cl.A_cl.cols()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotHurwitz) {
      throw Error(ErrorCode::kNotStabilizing, e.what());
    }
    throw;
  }
  const double lambda_max =
      Eigen::SelfAdjointEigenSolver<Matrix>(P, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  const double direction_norm =
      SpectralNorm(ClosedLoopStateDirection(plant, V));
  if (direction_norm == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * direction_norm * lambda_max);
}

TangentDirection PerturbDirection(const TangentDirection& V, double eta,
                                  Rng& rng) {
  if (eta == 0.0) return V;
  std::normal_distribution<double> normal(0.0, 1.0);
  TangentDirection noise = V;
  for (Matrix* block : {&noise.E, &noise.F, &noise.G}) {
    for (Eigen::Index j = 0; j < block->cols(); ++j) {
      for (Eigen::Index i = 0; i < block->rows(); ++i) {
        (*block)(i, j) = normal(rng);
      }
    }
  }
  const double noise_norm = noise.Norm();
  if (noise_norm == 0.0) return V;
  return V + (eta * V.Norm() / noise_norm) * noise;
}

namespace {

struct TrialPoint {
  bool admissible = false;
  double cost = 0.0;
};

TrialPoint Evaluate(const Plant& plant, const Controller& K_next) {
  TrialPoint t;
  const AdmissibilityReport report = IsAdmissible(plant, K_next);
  if (!report.admissible()) return t;
  try {
    t.cost = LqgCost(plant, K_next);
  } catch (const Error&) {
    return t;
  }
  t.admissible = std::isfinite(t.cost);
  return t;
}

}  // namespace

LineSearchResult BacktrackingLineSearch(const Plant& plant, const Controller& K,
                                        double cost, const TangentDirection& V,
                                        double norm_sq,
                                        const OptimizerConfig& config,
                                        Rng& rng) {
  constexpr int kMaxHalvings = 100;
  constexpr int kMaxPerturbations = 10;
  LineSearchResult result;
  double s = config.initial_step;
  if (config.certificate_clamp && !V.IsZero()) {
    s = std::min(s, 0.99 * StabilityCertificate(plant, K, V));
  }
  for (int halvings = 0; halvings <= kMaxHalvings; ++halvings, s *= config.backtrack) {
    TangentDirection direction = V;
    Controller next = Retract(K, direction, s);
    AdmissibilityReport report = IsAdmissible(plant, next);
    if (report.stabilizing && !report.minimal) {
      for (int k = 0; k < kMaxPerturbations; ++k) {
        ++result.perturbations;
        TangentDirection perturbed =
            PerturbDirection(V, config.perturb_scale, rng);
        Controller candidate = Retract(K, perturbed, s);
        if (IsAdmissible(plant, candidate).admissible()) {
          direction = std::move(perturbed);
          next = std::move(candidate);
          break;
        }
      }
    }
    const TrialPoint trial = Evaluate(plant, next);
    if (trial.admissible && cost - trial.cost >= config.armijo * s * norm_sq) {
      result.step = s;
      result.next = std::move(next);
      result.next_cost = trial.cost;
      result.direction = std::move(direction);
      result.halvings = halvings;
      return result;
    }
  }
  throw Error(ErrorCode::kStepSizeUnderflow,
              "no acceptable step after 100 halvings");
}

namespace {

struct Descent {
  double cost = 0.0;
  TangentDirection gradient;
  double norm_sq = 0.0;
};

Descent ComputeDescent(const Plant& plant, const Controller& K,
                       const OptimizerConfig& config) {
  Descent d;
  if (config.algorithm == Algorithm::kRgd) {
    RiemannianGradientResult r = RiemannianGradient(plant, K, config.weights);
    d.cost = r.cost;
    d.gradient = std::move(r.direction);
    d.norm_sq = r.norm_sq;
  } else {
    const CostSensitivity sens = ComputeCostSensitivity(plant, K);
    d.cost = sens.cost;
    d.gradient = EuclideanGradient(plant, K, sens);
    d.norm_sq = d.gradient.Dot(d.gradient);
  }
  return d;
}

}  // namespace

RunTrace RunOptimizer(const Plant& plant, const Controller& K0,
                      const OptimizerConfig& config,
                      std::optional<double> optimal_cost) {
  config.Validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - start)
        .count();
  };

  if (!IsAdmissible(plant, K0).admissible()) {
    throw Error(ErrorCode::kInadmissibleStart,
                "initial controller is not stabilizing and minimal");
  }
  if (!optimal_cost) {
    try {
      optimal_cost = LqgRiccatiOptimum(plant).cost;
    } catch (const Error&) {
      optimal_cost.reset();
    }
  }

  RunTrace trace;
  trace.algorithm = config.algorithm;
  trace.initial_controller = K0;
  trace.optimal_cost = optimal_cost;
  Rng rng(config.seed);
  Controller K = K0;

  for (int t = 0;; ++t) {
    Descent descent;
    try {
      descent = ComputeDescent(plant, K, config);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kMetricDegenerate) throw;
      trace.termination = Termination::kError;
      trace.message = e.what();
      break;
    }
    IterationRecord record;
    record.iter = t;
    record.cost = descent.cost;
    record.grad_norm = std::sqrt(descent.norm_sq);
    if (optimal_cost) record.gap = descent.cost - *optimal_cost;
    record.wall_ms = elapsed_ms();
    trace.records.push_back(record);

    if (record.gap && config.halt_gap && *record.gap < *config.halt_gap) {
      trace.termination = Termination::kHaltGap;
      break;
    }
    if (record.grad_norm < config.grad_tol) {
      trace.termination = Termination::kGradTol;
      break;
    }
    if (t >= config.max_iters) {
      trace.termination = Termination::kMaxIters;
      break;
    }
    try {
      LineSearchResult ls = BacktrackingLineSearch(
          plant, K, descent.cost, -descent.gradient, descent.norm_sq, config,
          rng);
      trace.records.back().step = ls.step;
      K = std::move(ls.next);
    } catch (const Error& e) {
      trace.termination = e.code() == ErrorCode::kStepSizeUnderflow
                              ? Termination::kStepUnderflow
                              : Termination::kError;
      trace.message = e.what();
      break;
    }
  }
  trace.final_controller = std::move(K);
  return trace;
}

RunTrace RunRgd(const Plant& plant, const Controller& K0,
                const OptimizerConfig& config,
                std::optional<double> optimal_cost) {
  OptimizerConfig c = config;
  c.algorithm = Algorithm::kRgd;
  return RunOptimizer(plant, K0, c, optimal_cost);
}

RunTrace RunGd(const Plant& plant, const Controller& K0,
               const OptimizerConfig& config,
               std::optional<double> optimal_cost) {
  OptimizerConfig c = config;
  c.algorithm = Algorithm::kGd;
  return RunOptimizer(plant, K0, c, optimal_cost);
}

Controller RandomMinimalInit(const Plant& plant, Rng& rng) {
  const int n = plant.n();
  std::uniform_real_distribution<double> pole(-2.0, -1.0);
  auto draw = [&] {
    std::vector<std::complex<double>> poles;
    for (int i = 0; i < n; ++i) poles.emplace_back(pole(rng), 0.0);
    return poles;
  };
  for (int attempt = 0; attempt < 20; ++attempt) {
    try {
      const Matrix F = PlacePoles(plant.A(), plant.B(), draw(), rng);
      const Matrix L =
          PlacePoles(plant.A().transpose(), plant.C().transpose(), draw(), rng)
              .transpose();
      Controller K{plant.A() - plant.B() * F - L * plant.C(), L, -F};
      if (IsAdmissible(plant, K).admissible()) return K;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPlacementFailure) throw;
    }
  }
  throw Error(ErrorCode::kInitFailure,
              "no admissible observer-based controller after 20 draws");
}

}  // namespace lqgopt
