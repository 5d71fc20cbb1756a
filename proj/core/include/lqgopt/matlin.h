#pragma once

// Dense real-matrix kernels: Lyapunov and Riccati solvers, spectral
// quantities, Kalman rank tests, pole placement and SPD solves.
//
// Every routine is a pure function of its arguments. Inputs containing NaN or
// Inf are rejected with ErrorCode::kNumericalFailure.

#include <complex>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lqgopt/error.h"

namespace lqgopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Seeded generator used everywhere randomness is needed. Callers own it.
using Rng = std::mt19937_64;

/// Default relative tolerance for Kalman rank tests.
inline constexpr double kDefaultRankTol = 1e-8;

/// Returns (M + Mᵀ)/2.
Matrix Symmetrize(const MatrixRef& M);

/// True iff every entry is finite.
bool AllFinite(const MatrixRef& M);

/// Largest real part over the eigenvalues of M.
double SpectralAbscissa(const MatrixRef& M);

/// Eigenvalues of a general real matrix.
std::vector<std::complex<double>> Eigenvalues(const MatrixRef& M);

/// Largest singular value.
double SpectralNorm(const MatrixRef& M);

/// Greedy nearest matching of two spectra; true when every requested value
/// has a distinct partner within `tol` (absolute).
bool SpectraMatch(std::span<const std::complex<double>> actual,
                  std::span<const std::complex<double>> requested, double tol);

/// Solves A P + P Aᵀ = -Q for Hurwitz A through SolveLyapunovSchur. The
/// Kronecker route is kept as a reference: its conditioning grows with the
/// fourth power of cond(T) under similarity A -> T A T⁻¹, which ruins the
/// coordinate laws at cond(T) near 1e3.
///
/// The result satisfies
/// ‖A P + P Aᵀ + Q‖_F ≤ 1e-10 · max(1, ‖Q‖_F, ‖A‖_F ‖P‖_F)
/// and is symmetric. Throws kNotHurwitz when the spectral abscissa of A is
/// nonnegative and kNumericalFailure when the residual bound is missed.
Matrix SolveLyapunov(const MatrixRef& A, const MatrixRef& Q);

/// Kronecker route: (I ⊗ A + A ⊗ I) vec(P) = -vec(Q), one refinement step.
Matrix SolveLyapunovKronecker(const MatrixRef& A, const MatrixRef& Q);

/// Schur route: complex Schur form of A followed by a column-wise
/// triangular back substitution.
Matrix SolveLyapunovSchur(const MatrixRef& A, const MatrixRef& Q);

/// Directional derivative of (A, Q) ↦ SolveLyapunov(A, Q) along (V, W):
/// L(A, V·L(A,Q) + L(A,Q)·Vᵀ + W).
Matrix LyapunovDifferential(const MatrixRef& A, const MatrixRef& Q,
                            const MatrixRef& V, const MatrixRef& W);

/// [B, AB, ..., A^{n-1}B].
Matrix ControllabilityMatrix(const MatrixRef& A, const MatrixRef& B);

/// [C; CA; ...; CA^{n-1}].
Matrix ObservabilityMatrix(const MatrixRef& A, const MatrixRef& C);

/// Extreme singular values of a Kalman matrix.
struct RankMargin {
  double min_sv = 0.0;
  double max_sv = 0.0;

  /// min_sv > tol · max(1, max_sv).
  bool FullRank(double tol) const;
};

RankMargin ControllabilityMargin(const MatrixRef& A, const MatrixRef& B);
RankMargin ObservabilityMargin(const MatrixRef& A, const MatrixRef& C);

bool IsControllable(const MatrixRef& A, const MatrixRef& B,
                    double tol = kDefaultRankTol);
bool IsObservable(const MatrixRef& A, const MatrixRef& C,
                  double tol = kDefaultRankTol);

/// Symmetric positive semidefinite test via the smallest eigenvalue, with
/// tolerance relative to the largest absolute eigenvalue.
bool IsPositiveSemidefinite(const MatrixRef& M, double rel_tol = 1e-12);
bool IsPositiveDefinite(const MatrixRef& M);

/// True when ‖M - Mᵀ‖_max ≤ rel_tol · max|M_ij|.
bool IsSymmetric(const MatrixRef& M, double rel_tol = 1e-12);

/// Symmetric PSD square root.
Matrix PsdSqrt(const MatrixRef& M);

/// Stabilizing solution of Aᵀ P + P A - P B R⁻¹ Bᵀ P + Q = 0 by
/// Newton-Kleinman iteration.
///
/// The initial gain places the poles of A - B F at -1 - i/n. Throws
/// kNoStabilizingSolution when no stabilizing initial gain can be found or the
/// iteration leaves the stabilizing set, and kNumericalFailure when the
/// residual bound 1e-10 · max(1, ‖Q‖_F) is not reached within 100 steps.
Matrix SolveCare(const MatrixRef& A, const MatrixRef& B, const MatrixRef& Q,
                 const MatrixRef& R);

/// Solves G x = d through a Cholesky factorization of G with one refinement
/// step; ‖G x - d‖ ≤ 1e-10 · max(‖d‖, ‖G‖_F ‖x‖). Throws kNotPositiveDefinite
/// when the factorization fails and kNumericalFailure when the bound is missed.
Vector SpdSolve(const MatrixRef& G, const VectorRef& d);

/// Returns F with spec(A - B F) = poles, using the Sylvester-equation method
/// A X - X Λ = B G with random G and F = G X⁻¹. `poles` must be closed under
/// conjugation. G is resampled (up to 10 draws) while cond(X) > 1e8 or the
/// placed spectrum misses a pole by more than 1e-6.
Matrix PlacePoles(const MatrixRef& A, const MatrixRef& B,
                  std::span<const std::complex<double>> poles, Rng& rng);

}  // namespace lqgopt
