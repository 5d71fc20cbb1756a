#include "lqgopt/matlin.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace lqgopt {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kEigenFailure: return "EigenFailure";
    case ErrorCode::kNoStabilizingSolution: return "NoStabilizingSolution";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kPlacementFailure: return "PlacementFailure";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidPlant: return "InvalidPlant";
    case ErrorCode::kNotStabilizing: return "NotStabilizing";
    case ErrorCode::kNotMinimal: return "NotMinimal";
    case ErrorCode::kSingularTransform: return "SingularTransform";
    case ErrorCode::kMetricDegenerate: return "MetricDegenerate";
    case ErrorCode::kZeroDirection: return "ZeroDirection";
    case ErrorCode::kStepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::kInadmissibleStart: return "InadmissibleStart";
    case ErrorCode::kInitFailure: return "InitFailure";
    case ErrorCode::kGenerationFailure: return "GenerationFailure";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {

constexpr double kResidualTol = 1e-10;

void RequireSquare(const MatrixRef& M, const char* name) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    std::ostringstream os;
    os << name << " must be square and nonempty, got " << M.rows() << "x"
       << M.cols();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

void RequireFinite(const MatrixRef& M, const char* name) {
  if (!AllFinite(M)) {
    throw Error(ErrorCode::kNumericalFailure,
                std::string(name) + " has non-finite entries");
  }
}

double LyapunovResidual(const MatrixRef& A, const MatrixRef& P,
                        const MatrixRef& Q) {
  return (A * P + P * A.transpose() + Q).norm();
}

void CheckLyapunovInputs(const MatrixRef& A, const MatrixRef& Q) {
  RequireSquare(A, "A");
  if (Q.rows() != A.rows() || Q.cols() != A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Lyapunov forcing term does not match A");
  }
  RequireFinite(A, "A");
  RequireFinite(Q, "Q");
  const double alpha = SpectralAbscissa(A);
  if (!(alpha < 0.0)) {
    std::ostringstream os;
    os << "spectral abscissa " << alpha << " >= 0";
    throw Error(ErrorCode::kNotHurwitz, os.str());
  }
}

Matrix FinishLyapunov(const MatrixRef& A, const MatrixRef& Q, Matrix P) {
  P = Symmetrize(P);
  const double residual = LyapunovResidual(A, P, Q);
  // Relative to the backward-error scale as well, so badly scaled but
  // well-posed instances are not rejected.
  const double bound =
      kResidualTol * std::max({1.0, Q.norm(), A.norm() * P.norm()});
  if (!std::isfinite(residual) || residual > bound) {
    std::ostringstream os;
    os << "Lyapunov residual " << residual << " exceeds " << bound;
    throw Error(ErrorCode::kNumericalFailure, os.str());
  }
  return P;
}

Matrix KroneckerSum(const MatrixRef& A) {
  const Eigen::Index k = A.rows();
  Matrix K = Matrix::Zero(k * k, k * k);
  // vec is column-major: index (i, j) -> i + k * j.
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index row = i + k * j;
      for (Eigen::Index r = 0; r < k; ++r) {
        K(row, r + k * j) += A(i, r);  // (I ⊗ A)
        K(row, i + k * r) += A(j, r);  // (A ⊗ I)
      }
    }
  }
  return K;
}

Matrix Unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

struct RealBlockSpectrum {
  Matrix lambda;                                // real block diagonal
  std::vector<std::complex<double>> ordered;    // poles in block order
};

RealBlockSpectrum BuildRealBlocks(std::span<const std::complex<double>> poles) {
  const auto n = static_cast<Eigen::Index>(poles.size());
  RealBlockSpectrum out;
  out.lambda = Matrix::Zero(n, n);
  std::vector<bool> used(poles.size(), false);
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (used[i]) continue;
    const auto p = poles[i];
    const double scale = std::max(1.0, std::abs(p));
    if (std::abs(p.imag()) <= 1e-12 * scale) {
      used[i] = true;
      out.lambda(at, at) = p.real();
      out.ordered.emplace_back(p.real(), 0.0);
      ++at;
      continue;
    }
    std::size_t partner = poles.size();
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      if (!used[j] && std::abs(poles[j] - std::conj(p)) <= 1e-10 * scale) {
        partner = j;
        break;
      }
    }
    if (partner == poles.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pole set is not closed under conjugation");
    }
    used[i] = used[partner] = true;
    const double a = p.real();
    const double b = std::abs(p.imag());
    out.lambda(at, at) = a;
    out.lambda(at, at + 1) = b;
    out.lambda(at + 1, at) = -b;
    out.lambda(at + 1, at + 1) = a;
    out.ordered.emplace_back(a, b);
    out.ordered.emplace_back(a, -b);
    at += 2;
  }
  return out;
}

}  // namespace

Matrix Symmetrize(const MatrixRef& M) { return 0.5 * (M + M.transpose()); }

bool AllFinite(const MatrixRef& M) { return M.allFinite(); }

std::vector<std::complex<double>> Eigenvalues(const MatrixRef& M) {
  RequireSquare(M, "M");
  RequireFinite(M, "M");
  Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenFailure, "eigenvalue iteration failed");
  }
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double SpectralAbscissa(const MatrixRef& M) {
  double alpha = -std::numeric_limits<double>::infinity();
  for (const auto& lambda : Eigenvalues(M)) {
    alpha = std::max(alpha, lambda.real());
  }
  return alpha;
}

double SpectralNorm(const MatrixRef& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

bool SpectraMatch(std::span<const std::complex<double>> actual,
                  std::span<const std::complex<double>> requested, double tol) {
  if (actual.size() != requested.size()) return false;
  std::vector<bool> taken(actual.size(), false);
  for (const auto& want : requested) {
    std::size_t best = actual.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < actual.size(); ++i) {
      if (taken[i]) continue;
      const double d = std::abs(actual[i] - want);
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    if (best == actual.size() || best_dist > tol) return false;
    taken[best] = true;
  }
  return true;
}

Matrix SolveLyapunov(const MatrixRef& A, const MatrixRef& Q) {
  return SolveLyapunovSchur(A, Q);
}

Matrix SolveLyapunovKronecker(const MatrixRef& A, const MatrixRef& Q) {
  CheckLyapunovInputs(A, Q);
  const Eigen::Index k = A.rows();
  const Eigen::PartialPivLU<Matrix> lu(KroneckerSum(A));
  const Vector rhs = -Eigen::Map<const Vector>(Matrix(Q).data(), k * k);
  Vector x = lu.solve(rhs);
  // One step of iterative refinement.
  Matrix P = Unvec(x, k, k);
  const Matrix R = -(A * P + P * A.transpose() + Q);
  x += lu.solve(Eigen::Map<const Vector>(R.data(), k * k));
  return FinishLyapunov(A, Q, Unvec(x, k, k));
}

Matrix SolveLyapunovSchur(const MatrixRef& A, const MatrixRef& Q) {
  CheckLyapunovInputs(A, Q);
  using CMatrix = Eigen::MatrixXcd;
  const Eigen::Index k = A.rows();
  Eigen::ComplexSchur<CMatrix> schur(A.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenFailure, "complex Schur iteration failed");
  }
  const CMatrix& T = schur.matrixT();
  const CMatrix& U = schur.matrixU();
  // A = U T Uᴴ, so T Y + Y Tᴴ = -Uᴴ Q U with Y = Uᴴ P U.
  const CMatrix C = -(U.adjoint() * Q.cast<std::complex<double>>() * U);
  CMatrix Y = CMatrix::Zero(k, k);
  for (Eigen::Index j = k - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = C.col(j);
    for (Eigen::Index l = j + 1; l < k; ++l) {
      rhs -= std::conj(T(j, l)) * Y.col(l);
    }
    CMatrix shifted = T;
    shifted.diagonal().array() += std::conj(T(j, j));
    Y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  const Matrix P = (U * Y * U.adjoint()).real();
  return FinishLyapunov(A, Q, P);
}

Matrix LyapunovDifferential(const MatrixRef& A, const MatrixRef& Q,
                            const MatrixRef& V, const MatrixRef& W) {
  if (V.rows() != A.rows() || V.cols() != A.cols() || W.rows() != A.rows() ||
      W.cols() != A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Lyapunov differential directions do not match A");
  }
  const Matrix P = SolveLyapunov(A, Q);
  const Matrix forcing = V * P + P * V.transpose() + W;
  return SolveLyapunov(A, Symmetrize(forcing));
}

Matrix ControllabilityMatrix(const MatrixRef& A, const MatrixRef& B) {
  RequireSquare(A, "A");
  if (B.rows() != A.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "B rows do not match A");
  }
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  Matrix K(n, n * m);
  Matrix block = B;
  for (Eigen::Index i = 0; i < n; ++i) {
    K.middleCols(i * m, m) = block;
    block = A * block;
  }
  return K;
}

Matrix ObservabilityMatrix(const MatrixRef& A, const MatrixRef& C) {
  return ControllabilityMatrix(A.transpose(), C.transpose()).transpose();
}

bool RankMargin::FullRank(double tol) const {
  return min_sv > tol * std::max(1.0, max_sv);
}

namespace {

RankMargin MarginOf(const Matrix& K, Eigen::Index required_rank) {
  RankMargin margin;
  if (K.size() == 0) return margin;
  Eigen::JacobiSVD<Matrix> svd(K);
  const auto& sv = svd.singularValues();
  margin.max_sv = sv(0);
  margin.min_sv = sv.size() >= required_rank ? sv(required_rank - 1) : 0.0;
  return margin;
}

}  // namespace

RankMargin ControllabilityMargin(const MatrixRef& A, const MatrixRef& B) {
  return MarginOf(ControllabilityMatrix(A, B), A.rows());
}

RankMargin ObservabilityMargin(const MatrixRef& A, const MatrixRef& C) {
  return MarginOf(ObservabilityMatrix(A, C), A.rows());
}

bool IsControllable(const MatrixRef& A, const MatrixRef& B, double tol) {
  return ControllabilityMargin(A, B).FullRank(tol);
}

bool IsObservable(const MatrixRef& A, const MatrixRef& C, double tol) {
  return ObservabilityMargin(A, C).FullRank(tol);
}

bool IsSymmetric(const MatrixRef& M, double rel_tol) {
  if (M.rows() != M.cols()) return false;
  const double scale = M.cwiseAbs().maxCoeff();
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool IsPositiveSemidefinite(const MatrixRef& M, double rel_tol) {
  if (M.rows() != M.cols() || !AllFinite(M)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(M),
                                           Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  return ev.minCoeff() >= -rel_tol * scale;
}

bool IsPositiveDefinite(const MatrixRef& M) {
  if (M.rows() != M.cols() || !AllFinite(M)) return false;
  Eigen::LLT<Matrix> llt(Symmetrize(M));
  return llt.info() == Eigen::Success;
}

Matrix PsdSqrt(const MatrixRef& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Symmetrize(M));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix SolveCare(const MatrixRef& A, const MatrixRef& B, const MatrixRef& Q,
                 const MatrixRef& R) {
  RequireSquare(A, "A");
  RequireSquare(R, "R");
  const Eigen::Index n = A.rows();
  if (B.rows() != n || B.cols() != R.rows() || Q.rows() != n ||
      Q.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "CARE data shapes disagree");
  }
  Eigen::LLT<Matrix> r_llt(Symmetrize(R));
  if (r_llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, "R is not positive definite");
  }
  const Matrix BRinvBt = Symmetrize(B * r_llt.solve(B.transpose()));

  // Stabilizing initial gain by pole placement at -1 - i/n (scaled on retry).
  Matrix F;
  Rng rng(0x5eed);
  for (int attempt = 0; attempt < 3 && F.size() == 0; ++attempt) {
    const double scale = std::pow(2.0, attempt);
    std::vector<std::complex<double>> poles;
    for (Eigen::Index i = 1; i <= n; ++i) {
      poles.emplace_back(-scale * (1.0 + static_cast<double>(i) /
                                             static_cast<double>(n)),
                         0.0);
    }
    try {
      F = PlacePoles(A, B, poles, rng);
    } catch (const Error&) {
      F.resize(0, 0);
    }
  }
  if (F.size() == 0) {
    throw Error(ErrorCode::kNoStabilizingSolution,
                "could not place an initial stabilizing gain");
  }

  const double bound = kResidualTol * std::max(1.0, Q.norm());
  auto residual_of = [&](const Matrix& P) {
    return (A.transpose() * P + P * A - P * BRinvBt * P + Q).norm();
  };

  Matrix best;
  double best_residual = std::numeric_limits<double>::infinity();
  int polish = 0;
  for (int iter = 0; iter < 100; ++iter) {
    const Matrix Acl = A - B * F;
    Matrix P;
    try {
      P = SolveLyapunov(Acl.transpose(),
                        Symmetrize(Q + F.transpose() * R * F));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNotHurwitz) {
        throw Error(ErrorCode::kNoStabilizingSolution,
                    "Newton-Kleinman iterate lost stability");
      }
      throw;
    }
    F = r_llt.solve(B.transpose() * P);
    const double residual = residual_of(P);
    if (residual < best_residual) {
      best_residual = residual;
      best = P;
    } else if (best_residual <= bound) {
      break;  // stagnated after convergence
    }
    // Take one extra Newton step once the bound is met.
    if (best_residual <= bound && ++polish > 1) break;
  }
  if (!(best_residual <= bound)) {
    std::ostringstream os;
    os << "CARE residual " << best_residual << " exceeds " << bound;
    throw Error(ErrorCode::kNumericalFailure, os.str());
  }
  const Matrix K = r_llt.solve(B.transpose() * best);
  if (!(SpectralAbscissa(A - B * K) < 0.0)) {
    throw Error(ErrorCode::kNoStabilizingSolution,
                "CARE solution is not stabilizing");
  }
  return best;
}

Vector SpdSolve(const MatrixRef& G, const VectorRef& d) {
  RequireSquare(G, "G");
  if (d.size() != G.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "rhs length does not match G");
  }
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, "Cholesky factorization failed");
  }
  Vector x = llt.solve(d);
  x += llt.solve(d - G * x);
  const double residual = (G * x - d).norm();
  // Cholesky is backward stable, so the attainable residual scales with
  // ‖G‖‖x‖ rather than ‖d‖ when G is badly conditioned.
  const double bound = kResidualTol * std::max(d.norm(), G.norm() * x.norm());
  if (!std::isfinite(residual) || residual > bound) {
    std::ostringstream os;
    os << "SPD solve residual " << residual << " exceeds " << bound;
    throw Error(ErrorCode::kNumericalFailure, os.str());
  }
  return x;
}

Matrix PlacePoles(const MatrixRef& A, const MatrixRef& B,
                  std::span<const std::complex<double>> poles, Rng& rng) {
  RequireSquare(A, "A");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (B.rows() != n || static_cast<Eigen::Index>(poles.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "pole placement needs n poles and B with n rows");
  }
  if (!IsControllable(A, B)) {
    throw Error(ErrorCode::kPlacementFailure, "(A, B) is not controllable");
  }
  const RealBlockSpectrum spectrum = BuildRealBlocks(poles);
  const Matrix& Lambda = spectrum.lambda;

  // vec(A X - X Λ) = (I ⊗ A - Λᵀ ⊗ I) vec(X).
  Matrix S = Matrix::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    S.block(j * n, j * n, n, n) += A;
    for (Eigen::Index l = 0; l < n; ++l) {
      S.block(j * n, l * n, n, n).diagonal().array() -= Lambda(l, j);
    }
  }
  const Eigen::FullPivLU<Matrix> sylvester(S);
  if (!sylvester.isInvertible()) {
    throw Error(ErrorCode::kPlacementFailure,
                "requested poles intersect the spectrum of A");
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 10; ++attempt) {
    Matrix G(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) G(i, j) = normal(rng);
    }
    const Matrix BG = B * G;
    const Vector x =
        sylvester.solve(Eigen::Map<const Vector>(BG.data(), n * n));
    const Matrix X = Unvec(x, n, n);
    Eigen::JacobiSVD<Matrix> svd(X);
    const auto& sv = svd.singularValues();
    if (!(sv(n - 1) > 0.0) || sv(0) / sv(n - 1) > 1e8) continue;
    const Matrix F = X.transpose().partialPivLu().solve(G.transpose()).transpose();
    if (!AllFinite(F)) continue;
    const auto placed = Eigenvalues(A - B * F);
    if (SpectraMatch(placed, spectrum.ordered, 1e-6)) return F;
  }
  throw Error(ErrorCode::kPlacementFailure,
              "no well-conditioned placement after 10 draws");
}

}  // namespace lqgopt
