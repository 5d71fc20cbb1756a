#include "lqgopt/bench.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace lqgopt {

Plant GenerateRandomPlant(const RandomPlantSpec& spec, Rng& rng) {
  if (spec.n < 1 || spec.m < 1 || spec.p < 1 || !(spec.density > 0.0) ||
      spec.density > 1.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "random plant needs n,m,p >= 1 and density in (0,1]");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto sample = [&](int rows, int cols) {
    Matrix M(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) {
        M(i, j) = coin(rng) < spec.density ? normal(rng) : 0.0;
      }
    }
    return M;
  };
  for (int attempt = 0; attempt < 50; ++attempt) {
    PlantMatrices d;
    d.A = sample(spec.n, spec.n);
    d.B = sample(spec.n, spec.m);
    d.C = sample(spec.p, spec.n);
    d.W = spec.W.value_or(Matrix::Identity(spec.n, spec.n));
    d.V = spec.V.value_or(Matrix::Identity(spec.p, spec.p));
    d.Q = spec.Q.value_or(Matrix::Identity(spec.n, spec.n));
    d.R = spec.R.value_or(Matrix::Identity(spec.m, spec.m));
    try {
      return Plant(std::move(d));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidPlant) throw;
    }
  }
  throw Error(ErrorCode::kGenerationFailure,
              "no valid random plant after 50 draws");
}

Plant GenerateRandomPlant(int n, int m, int p, double density, Rng& rng) {
  RandomPlantSpec spec;
  spec.n = n;
  spec.m = m;
  spec.p = p;
  spec.density = density;
  return GenerateRandomPlant(spec, rng);
}

Rng FamilyRng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

std::vector<ExperimentMethod> DefaultMethods() {
  return {
      {"GD", Algorithm::kGd, MetricWeights{1.0, 1.0, 1.0}},
      {"RGD_w111", Algorithm::kRgd, MetricWeights{1.0, 1.0, 1.0}},
      {"RGD_w100", Algorithm::kRgd, MetricWeights{1.0, 0.0, 0.0}},
  };
}

std::optional<int> IterationsToGap(const RunTrace& trace, double target) {
  for (const auto& r : trace.records) {
    if (r.gap && *r.gap <= target) return r.iter;
  }
  return std::nullopt;
}

double MedianIterations(std::span<const std::optional<int>> iters,
                        int max_iters) {
  if (iters.empty()) return 0.0;
  std::vector<double> v;
  v.reserve(iters.size());
  for (const auto& i : iters) {
    v.push_back(i ? static_cast<double>(*i) : max_iters + 1.0);
  }
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

ExperimentResult RunExperiment(std::span<const BenchmarkSystem> suite,
                               const OptimizerConfig& base,
                               std::span<const ExperimentMethod> methods) {
  base.Validate();
  ExperimentResult result;
  for (std::size_t s = 0; s < suite.size(); ++s) {
    const BenchmarkSystem& system = suite[s];
    std::optional<Controller> K0;
    std::string init_error;
    try {
      Rng rng = FamilyRng(base.seed, s);
      K0 = RandomMinimalInit(system.plant, rng);
    } catch (const Error& e) {
      init_error = e.what();
    }
    std::optional<double> optimum = system.known_cost;
    if (!optimum) {
      try {
        optimum = LqgRiccatiOptimum(system.plant).cost;
      } catch (const Error&) {
      }
    }
    result.initial_controllers.push_back(K0);

    for (const auto& method : methods) {
      SummaryRow row;
      row.system = system.name;
      row.algorithm = method.label;
      ExperimentRun run{system.name, method.label, std::nullopt};
      if (!K0) {
        row.error = init_error;
      } else {
        OptimizerConfig config = base;
        config.algorithm = method.algorithm;
        config.weights = method.weights;
        try {
          run.trace = RunOptimizer(system.plant, *K0, config, optimum);
          const RunTrace& trace = *run.trace;
          row.iters_to_target = IterationsToGap(trace);
          row.termination = trace.termination;
          row.error = trace.message;
          if (!trace.records.empty()) {
            row.final_gap = trace.records.back().gap;
            row.wall_ms = trace.records.back().wall_ms;
          }
        } catch (const Error& e) {
          row.error = e.what();
        }
      }
      result.summary.push_back(std::move(row));
      result.runs.push_back(std::move(run));
    }
  }
  return result;
}

Matrix FiniteDifferenceHessian(const Plant& plant, const Controller& K,
                               double h) {
  if (!(h > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "Hessian step must be positive");
  }
  const ClosedLoop cl = AssembleClosedLoop(plant, K);
  if (!(SpectralAbscissa(cl.A_cl) < -10.0 * h)) {
    throw Error(ErrorCode::kNotStabilizing,
                "stability margin too small for the Hessian step");
  }
  const TangentBasis basis(K.order(), plant.m(), plant.p());
  const int N = basis.size();
  Matrix H(N, N);
  for (int j = 0; j < N; ++j) {
    const TangentDirection e = basis[j];
    const Vector plus =
        basis.Coordinates(EuclideanGradient(plant, Retract(K, e, h)));
    const Vector minus =
        basis.Coordinates(EuclideanGradient(plant, Retract(K, e, -h)));
    H.col(j) = (plus - minus) / (2.0 * h);
  }
  return Symmetrize(H);
}

SignatureReport ClassifySignature(const Matrix& H, double zero_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(H),
                                           Eigen::EigenvaluesOnly);
  SignatureReport report;
  report.eigenvalues = es.eigenvalues();
  report.dimension = static_cast<int>(H.rows());
  const double scale = report.eigenvalues.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i) {
    const double lambda = report.eigenvalues(i);
    if (std::abs(lambda) <= zero_tol * scale) {
      ++report.zero;
    } else if (lambda < 0.0) {
      ++report.negative;
    } else {
      ++report.positive;
    }
  }
  return report;
}

SignatureReport HessianSignatureCheck(const Plant& plant, double h_factor,
                                      double zero_tol) {
  const LqgOptimum opt = LqgRiccatiOptimum(plant);
  if (!IsAdmissible(plant, opt.controller).minimal) {
    throw Error(ErrorCode::kNotMinimal, "LQG optimal controller is not minimal");
  }
  const double h = h_factor * (1.0 + opt.controller.Norm());
  SignatureReport report =
      ClassifySignature(FiniteDifferenceHessian(plant, opt.controller, h),
                        zero_tol);
  report.orbit_dimension = plant.n() * plant.n();
  return report;
}

}  // namespace lqgopt
