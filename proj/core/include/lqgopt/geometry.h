#pragma once

// Krishnaprasad-Martin metric on controller tangent spaces: closed-loop
// Grammians, the maps V ↦ (dA_cl, dB_cl, dC_cl), the metric inner product,
// its Gram matrix on a fixed frame, and Euclidean / Riemannian gradients of
// the LQG cost.

#include "lqgopt/lqg.h"

namespace lqgopt {

/// Weights of the three metric terms. w1 > 0, w2 ≥ 0, w3 ≥ 0.
struct MetricWeights {
  double w1 = 1.0;
  double w2 = 1.0;
  double w3 = 1.0;

  /// Throws kInvalidArgument when outside the admissible range.
  void Validate() const;
};

struct GrammianPair {
  Matrix Wc;  // L(A_cl, B_cl B_clᵀ)
  Matrix Wo;  // L(A_clᵀ, C_clᵀ C_cl)
};

/// Solved at the balanced realization of K and mapped back, so the result
/// does not inherit the conditioning of the controller coordinates. Throws
/// kNotStabilizing, or kNotMinimal when either Grammian fails a Cholesky
/// positive-definiteness check.
GrammianPair ClosedLoopGrammians(const Plant& plant, const Controller& K);

struct HatMaps {
  Matrix E_hat;  // dA_cl(V) = [[0, B G], [F C, E]]
  Matrix F_hat;  // dB_cl(V) = [[0, 0], [0, F]]
  Matrix G_hat;  // dC_cl(V) = [[0, 0], [0, G]]
};

HatMaps ComputeHatMaps(const Plant& plant, const TangentDirection& V);

/// Canonical orthonormal frame of the tangent space for controllers of order
/// q: unit entries of E in row-major order, then F, then G. Coordinates of a
/// direction in this frame are its entries in the same order.
class TangentBasis {
 public:
  TangentBasis(int q, int m, int p);

  int size() const { return q_ * q_ + q_ * p_ + m_ * q_; }
  int q() const { return q_; }

  TangentDirection operator[](int i) const;
  Vector Coordinates(const TangentDirection& V) const;
  TangentDirection FromCoordinates(const VectorRef& c) const;

 private:
  int q_, m_, p_;
};

/// S with S Wc22 Sᵀ = S⁻ᵀ Wo22 S⁻¹ diagonal, where Wc22 and Wo22 are the
/// controller blocks of the closed-loop Grammians. Throws kNotMinimal when a
/// block is singular.
struct BalancingTransform {
  Matrix S;
  Matrix S_inv;
};
BalancingTransform ControllerBalancingTransform(const Plant& plant,
                                                const Controller& K);

/// The metric frozen at one controller: Grammians are computed once, at the
/// balanced realization of K, and directions are mapped there.
class KmMetric {
 public:
  KmMetric(const Plant& plant, const Controller& K, MetricWeights weights);

  double Inner(const TangentDirection& V1, const TangentDirection& V2) const;

  const MetricWeights& weights() const { return weights_; }

 private:
  Plant plant_;
  MetricWeights weights_;
  BalancingTransform transform_;
  GrammianPair grammians_;  // at the balanced realization
};

/// w1 tr[Wo Ê1 Wc Ê2ᵀ] + w2 tr[F̂1ᵀ Wo F̂2] + w3 tr[Ĝ1 Wc Ĝ2ᵀ].
double KmInner(const Plant& plant, const Controller& K,
               const MetricWeights& weights, const TangentDirection& V1,
               const TangentDirection& V2);

/// Metric coordinates G_ij = <E_i, E_j>_K on the canonical frame.
struct GramMatrix {
  Matrix G;            // assembled, symmetric; jitter already added
  double jitter = 0.0; // multiple of the identity added before factoring
  Controller anchor;
  MetricWeights weights;
};

/// Assembles G and verifies a Cholesky factorization. On failure adds
/// λI with λ = 1e-12·tr(G)/N, escalating ×100 for up to three retries, then
/// throws kMetricDegenerate.
GramMatrix MetricGramMatrix(const Plant& plant, const Controller& K,
                            const MetricWeights& weights,
                            const TangentBasis& basis);

/// Euclidean gradient of J on the canonical frame, evaluated in closed form
/// from X and its adjoint Y. Component i equals dJ_K(E_i).
TangentDirection EuclideanGradient(const Plant& plant, const Controller& K);
TangentDirection EuclideanGradient(const Plant& plant, const Controller& K,
                                   const CostSensitivity& sens);

struct RiemannianGradientResult {
  TangentDirection direction;
  double norm_sq = 0.0;    // dᵀ G⁻¹ d
  Vector differential;     // d_i = dJ_K(E_i)
  double cost = 0.0;       // J(K)
  double jitter = 0.0;
};

/// ∇J = Σ_j g_j E_j with G g = d solved by Cholesky. The solve runs at the
/// balanced realization of K and the result is mapped back, which is exact
/// by equivariance and keeps the conditioning coordinate independent.
RiemannianGradientResult RiemannianGradient(const Plant& plant,
                                            const Controller& K,
                                            const MetricWeights& weights);

}  // namespace lqgopt
