#pragma once

// Plant and dynamic output-feedback controller model, closed-loop assembly,
// the LQG cost with its differential, controller coordinate changes, and the
// classical Riccati-based optimum.

#include <string>
#include <vector>

#include "lqgopt/matlin.h"

namespace lqgopt {

/// Raw plant data, unchecked. Dimensions: A n×n, B n×m, C p×n, W n×n,
/// V p×p, Q n×n, R m×m.
struct PlantMatrices {
  Matrix A, B, C, W, V, Q, R;
};

/// One named assumption check on plant data.
struct PlantCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs every plant assumption check and reports each one; never throws.
/// Checks: dimensions, finiteness, W/Q symmetric PSD, V/R symmetric PD,
/// (A,B) and (A,W^{1/2}) controllable, (A,C) and (A,Q^{1/2}) observable.
std::vector<PlantCheck> CheckPlant(const PlantMatrices& data,
                                   double tol = kDefaultRankTol);

/// Validated plant. Construction throws ErrorCode::kInvalidPlant naming the
/// first failed check. Symmetric inputs are symmetrized on construction.
class Plant {
 public:
  explicit Plant(PlantMatrices data, double tol = kDefaultRankTol);

  const Matrix& A() const { return data_.A; }
  const Matrix& B() const { return data_.B; }
  const Matrix& C() const { return data_.C; }
  const Matrix& W() const { return data_.W; }
  const Matrix& V() const { return data_.V; }
  const Matrix& Q() const { return data_.Q; }
  const Matrix& R() const { return data_.R; }
  const PlantMatrices& matrices() const { return data_; }

  int n() const { return static_cast<int>(data_.A.rows()); }
  int m() const { return static_cast<int>(data_.B.cols()); }
  int p() const { return static_cast<int>(data_.C.rows()); }

 private:
  PlantMatrices data_;
};

/// Dynamic controller ξ' = A_K ξ + B_K y, u = C_K ξ of order q.
struct Controller {
  Matrix A_K;  // q×q
  Matrix B_K;  // q×p
  Matrix C_K;  // m×q

  int order() const { return static_cast<int>(A_K.rows()); }

  /// [[0_{m×p}, C_K], [B_K, A_K]].
  Matrix Block() const;

  /// Frobenius norm of the block form.
  double Norm() const;
};

/// Tangent vector [[0, G], [F, E]] at a controller of order q.
struct TangentDirection {
  Matrix E;  // q×q
  Matrix F;  // q×p
  Matrix G;  // m×q

  static TangentDirection Zero(int q, int m, int p);

  int order() const { return static_cast<int>(E.rows()); }
  int dimension() const {
    return static_cast<int>(E.size() + F.size() + G.size());
  }

  /// Frobenius inner product tr(V1ᵀ V2) over the block form.
  double Dot(const TangentDirection& other) const;
  double Norm() const;
  bool IsZero() const;

  TangentDirection& operator+=(const TangentDirection& other);
  TangentDirection& operator-=(const TangentDirection& other);
  TangentDirection& operator*=(double scale);
};

TangentDirection operator+(TangentDirection a, const TangentDirection& b);
TangentDirection operator-(TangentDirection a, const TangentDirection& b);
TangentDirection operator*(double scale, TangentDirection v);
TangentDirection operator-(TangentDirection v);

/// Euclidean retraction K + t·V.
Controller Retract(const Controller& K, const TangentDirection& V,
                   double t = 1.0);

/// Difference of two controllers of the same order, as a tangent direction.
TangentDirection Difference(const Controller& a, const Controller& b);

/// Combined plant/controller closed loop.
///
/// D_cl is carried for completeness of the realization; no computation in
/// this library reads it.
struct ClosedLoop {
  Matrix A_cl;  // (n+q)×(n+q)
  Matrix B_cl;  // (n+q)×(n+p)
  Matrix C_cl;  // (p+m)×(n+q)
  Matrix D_cl;  // (p+m)×(n+p)
  Matrix Q_cl;  // diag(Q, C_Kᵀ R C_K)
  Matrix W_cl;  // diag(W, B_K V B_Kᵀ)
};

/// Throws kDimensionMismatch when K does not fit the plant.
void CheckDimensions(const Plant& plant, const Controller& K);
void CheckDimensions(const Plant& plant, const TangentDirection& V);

ClosedLoop AssembleClosedLoop(const Plant& plant, const Controller& K);

/// dA_cl(V) = [[0, B G], [F C, E]]; A_cl is affine in K.
Matrix ClosedLoopStateDirection(const Plant& plant, const TangentDirection& V);

/// X(K) = L(A_cl, W_cl). Throws kNotStabilizing for non-stabilizing K.
Matrix StateCovariance(const Plant& plant, const Controller& K);

/// J(K) = tr(Q_cl X). Throws kNotStabilizing for non-stabilizing K.
double LqgCost(const Plant& plant, const Controller& K);

/// X and the adjoint Y = L(A_clᵀ, Q_cl) at one controller. Reused across
/// every directional derivative at that controller.
struct CostSensitivity {
  ClosedLoop closed_loop;
  Matrix X;
  Matrix Y;
  double cost = 0.0;
};

CostSensitivity ComputeCostSensitivity(const Plant& plant, const Controller& K);

/// dJ_K(V) by the adjoint identity
///   tr(dQ_cl X) + tr(Y (Ê X + X Êᵀ + dW_cl)).
double CostDifferential(const Plant& plant, const Controller& K,
                        const TangentDirection& V);
double CostDifferential(const Plant& plant, const Controller& K,
                        const CostSensitivity& sens, const TangentDirection& V);

/// dJ_K(V) = tr(dQ_cl X + Q_cl dX) with dX evaluated through the nested
/// Lyapunov differential. Reference route, one extra pair of solves per call.
double CostDifferentialDirect(const Plant& plant, const Controller& K,
                              const TangentDirection& V);

/// (S A_K S⁻¹, S B_K, C_K S⁻¹). Throws kSingularTransform when cond(S) ≥ 1e12.
Controller CoordinateTransform(const Controller& K, const MatrixRef& S);

/// The same linear map applied to a tangent direction.
TangentDirection CoordinateTransform(const TangentDirection& V,
                                     const MatrixRef& S);

struct AdmissibilityReport {
  bool stabilizing = false;
  bool minimal = false;
  double spectral_abscissa = 0.0;
  double min_sv_ctrb = 0.0;
  double min_sv_obsv = 0.0;

  bool admissible() const { return stabilizing && minimal; }
};

/// Stability of A_cl and minimality of (A_K, B_K, C_K). Degenerate inputs
/// report false rather than throwing, except for dimension mismatches.
AdmissibilityReport IsAdmissible(const Plant& plant, const Controller& K,
                                 double tol = kDefaultRankTol);

struct LqgOptimum {
  Controller controller;
  double cost = 0.0;
  Matrix P;      // control Riccati solution
  Matrix Sigma;  // filter Riccati solution
};

/// Observer-based optimal controller A_K = A - B F - L C, B_K = L, C_K = -F
/// with F = R⁻¹BᵀP, L = ΣCᵀV⁻¹, and J* = tr(P W) + tr(P B R⁻¹ Bᵀ P Σ).
LqgOptimum LqgRiccatiOptimum(const Plant& plant);

}  // namespace lqgopt
