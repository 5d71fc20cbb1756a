#include "lqgopt/geometry.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace lqgopt {

void MetricWeights::Validate() const {
  if (!(w1 > 0.0) || !(w2 >= 0.0) || !(w3 >= 0.0) || !std::isfinite(w1) ||
      !std::isfinite(w2) || !std::isfinite(w3)) {
    std::ostringstream os;
    os << "metric weights (" << w1 << "," << w2 << "," << w3
       << ") need w1 > 0 and w2, w3 >= 0";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

namespace {

GrammianPair SolveGrammians(const Plant& plant, const Controller& K) {
  const ClosedLoop cl = AssembleClosedLoop(plant, K);
  GrammianPair g;
  try {
    g.Wc = SolveLyapunov(cl.A_cl, cl.B_cl * cl.B_cl.transpose());
    g.Wo = SolveLyapunov(cl.A_cl.transpose(), cl.C_cl.transpose() * cl.C_cl);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotHurwitz) {
      throw Error(ErrorCode::kNotStabilizing, e.what());
    }
    throw;
  }
  if (!IsPositiveDefinite(g.Wc) || !IsPositiveDefinite(g.Wo)) {
    throw Error(ErrorCode::kNotMinimal,
                "closed-loop Grammians are not positive definite");
  }
  return g;
}

BalancingTransform BalanceFrom(const GrammianPair& g, int q) {
  const Matrix Wc22 = Symmetrize(g.Wc.bottomRightCorner(q, q));
  const Matrix Wo22 = Symmetrize(g.Wo.bottomRightCorner(q, q));
  const Eigen::LLT<Matrix> llt(Wc22);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotMinimal, "controller Grammian block is singular");
  }
  const Matrix L = llt.matrixL();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(
      Symmetrize(L.transpose() * Wo22 * L));
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
    throw Error(ErrorCode::kNotMinimal, "controller Grammian block is singular");
  }
  // Wc22 = L Lᵀ and Lᵀ Wo22 L = U Σ² Uᵀ give S = Σ^{1/2} Uᵀ L⁻¹.
  const Vector root = es.eigenvalues().array().pow(0.25);
  const Matrix& U = es.eigenvectors();
  BalancingTransform t;
  t.S = root.asDiagonal() *
        L.triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(U.transpose());
  t.S_inv = L * U * root.cwiseInverse().asDiagonal();
  return t;
}

Controller Apply(const BalancingTransform& t, const Controller& K) {
  return {t.S * K.A_K * t.S_inv, t.S * K.B_K, K.C_K * t.S_inv};
}

TangentDirection Apply(const BalancingTransform& t, const TangentDirection& V) {
  return {t.S * V.E * t.S_inv, t.S * V.F, V.G * t.S_inv};
}

// Grammians at the balanced realization of K together with the transform.
struct BalancedGrammians {
  BalancingTransform t;
  GrammianPair g;
};

BalancedGrammians SolveBalancedGrammians(const Plant& plant, const Controller& K) {
  BalancedGrammians b;
  b.t = BalanceFrom(SolveGrammians(plant, K), K.order());
  b.g = SolveGrammians(plant, Apply(b.t, K));
  return b;
}

// Gram matrix of the given directions under Grammians g.
GramMatrix AssembleGram(const Plant& plant, const GrammianPair& g,
                        const MetricWeights& weights,
                        const std::vector<TangentDirection>& dirs) {
  const int q = dirs.front().order();
  const int N = static_cast<int>(dirs.size());
  const Matrix Wc22 = g.Wc.bottomRightCorner(q, q);
  const Matrix Wo22 = g.Wo.bottomRightCorner(q, q);
  std::vector<Matrix> e_hat, wo_e_wc, wo_f, g_wc;
  for (const TangentDirection& V : dirs) {
    e_hat.push_back(ClosedLoopStateDirection(plant, V));
    wo_e_wc.push_back(g.Wo * e_hat.back() * g.Wc);
    wo_f.push_back(Wo22 * V.F);
    g_wc.push_back(V.G * Wc22);
  }

  GramMatrix out;
  out.weights = weights;
  out.G.resize(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      const double e = wo_e_wc[i].cwiseProduct(e_hat[j]).sum();
      const double f = dirs[i].F.cwiseProduct(wo_f[j]).sum();
      const double gg = g_wc[i].cwiseProduct(dirs[j].G).sum();
      const double value = weights.w1 * e + weights.w2 * f + weights.w3 * gg;
      out.G(i, j) = value;
      out.G(j, i) = value;
    }
  }

  if (Eigen::LLT<Matrix>(out.G).info() == Eigen::Success) return out;
  double lambda = 1e-12 * out.G.trace() / N;
  for (int retry = 0; retry < 3; ++retry, lambda *= 100.0) {
    Matrix jittered = out.G;
    jittered.diagonal().array() += lambda;
    if (Eigen::LLT<Matrix>(jittered).info() == Eigen::Success) {
      out.G = std::move(jittered);
      out.jitter = lambda;
      return out;
    }
  }
  throw Error(ErrorCode::kMetricDegenerate,
              "metric Gram matrix is not positive definite after jitter");
}

}  // namespace

GrammianPair ClosedLoopGrammians(const Plant& plant, const Controller& K) {
  const BalancedGrammians b = SolveBalancedGrammians(plant, K);
  // Wc(K_b) = T Wc(K) Tᵀ and Wo(K_b) = T⁻ᵀ Wo(K) T⁻¹ with T = diag(I, S).
  const int n = plant.n(), q = K.order();
  Matrix T = Matrix::Identity(n + q, n + q);
  Matrix T_inv = T;
  T.bottomRightCorner(q, q) = b.t.S;
  T_inv.bottomRightCorner(q, q) = b.t.S_inv;
  return {Symmetrize(T_inv * b.g.Wc * T_inv.transpose()),
          Symmetrize(T.transpose() * b.g.Wo * T)};
}

BalancingTransform ControllerBalancingTransform(const Plant& plant,
                                                const Controller& K) {
  return BalanceFrom(SolveGrammians(plant, K), K.order());
}

HatMaps ComputeHatMaps(const Plant& plant, const TangentDirection& V) {
  const int n = plant.n(), m = plant.m(), p = plant.p(), q = V.order();
  HatMaps h;
  h.E_hat = ClosedLoopStateDirection(plant, V);
  h.F_hat = Matrix::Zero(n + q, n + p);
  h.F_hat.bottomRightCorner(q, p) = V.F;
  h.G_hat = Matrix::Zero(p + m, n + q);
  h.G_hat.bottomRightCorner(m, q) = V.G;
  return h;
}

TangentBasis::TangentBasis(int q, int m, int p) : q_(q), m_(m), p_(p) {
  if (q < 1 || m < 1 || p < 1) {
    throw Error(ErrorCode::kInvalidArgument, "basis dimensions must be >= 1");
  }
}

TangentDirection TangentBasis::operator[](int i) const {
  Vector c = Vector::Zero(size());
  c(i) = 1.0;
  return FromCoordinates(c);
}

Vector TangentBasis::Coordinates(const TangentDirection& V) const {
  Vector c(size());
  int k = 0;
  for (int r = 0; r < q_; ++r)
    for (int s = 0; s < q_; ++s) c(k++) = V.E(r, s);
  for (int r = 0; r < q_; ++r)
    for (int s = 0; s < p_; ++s) c(k++) = V.F(r, s);
  for (int r = 0; r < m_; ++r)
    for (int s = 0; s < q_; ++s) c(k++) = V.G(r, s);
  return c;
}

TangentDirection TangentBasis::FromCoordinates(const VectorRef& c) const {
  if (c.size() != size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "coordinate vector length does not match the basis");
  }
  TangentDirection V = TangentDirection::Zero(q_, m_, p_);
  int k = 0;
  for (int r = 0; r < q_; ++r)
    for (int s = 0; s < q_; ++s) V.E(r, s) = c(k++);
  for (int r = 0; r < q_; ++r)
    for (int s = 0; s < p_; ++s) V.F(r, s) = c(k++);
  for (int r = 0; r < m_; ++r)
    for (int s = 0; s < q_; ++s) V.G(r, s) = c(k++);
  return V;
}

KmMetric::KmMetric(const Plant& plant, const Controller& K,
                   MetricWeights weights)
    : plant_(plant), weights_(weights) {
  weights_.Validate();
  const BalancedGrammians b = SolveBalancedGrammians(plant, K);
  transform_ = b.t;
  grammians_ = b.g;
}

double KmMetric::Inner(const TangentDirection& V1,
                       const TangentDirection& V2) const {
  // Evaluated at the balanced realization; the metric is invariant.
  const HatMaps h1 = ComputeHatMaps(plant_, Apply(transform_, V1));
  const HatMaps h2 = ComputeHatMaps(plant_, Apply(transform_, V2));
  const Matrix& Wc = grammians_.Wc;
  const Matrix& Wo = grammians_.Wo;
  const double e = (Wo * h1.E_hat * Wc * h2.E_hat.transpose()).trace();
  const double f = (h1.F_hat.transpose() * Wo * h2.F_hat).trace();
  const double g = (h1.G_hat * Wc * h2.G_hat.transpose()).trace();
  return weights_.w1 * e + weights_.w2 * f + weights_.w3 * g;
}

double KmInner(const Plant& plant, const Controller& K,
               const MetricWeights& weights, const TangentDirection& V1,
               const TangentDirection& V2) {
  return KmMetric(plant, K, weights).Inner(V1, V2);
}

GramMatrix MetricGramMatrix(const Plant& plant, const Controller& K,
                            const MetricWeights& weights,
                            const TangentBasis& basis) {
  weights.Validate();
  CheckDimensions(plant, K);
  if (basis.q() != K.order()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "basis order does not match the controller");
  }
  const BalancedGrammians b = SolveBalancedGrammians(plant, K);
  std::vector<TangentDirection> dirs;
  dirs.reserve(basis.size());
  for (int i = 0; i < basis.size(); ++i) dirs.push_back(Apply(b.t, basis[i]));
  GramMatrix out = AssembleGram(plant, b.g, weights, dirs);
  out.anchor = K;
  return out;
}

TangentDirection EuclideanGradient(const Plant& plant, const Controller& K) {
  return EuclideanGradient(plant, K, ComputeCostSensitivity(plant, K));
}

TangentDirection EuclideanGradient(const Plant& plant, const Controller& K,
                                   const CostSensitivity& sens) {
  const int n = plant.n(), q = K.order();
  const Matrix M = sens.X * sens.Y;
  const Matrix M12 = M.topRightCorner(n, q);
  const Matrix M21 = M.bottomLeftCorner(q, n);
  const Matrix M22 = M.bottomRightCorner(q, q);
  const Matrix X22 = sens.X.bottomRightCorner(q, q);
  const Matrix Y22 = sens.Y.bottomRightCorner(q, q);
  TangentDirection grad;
  grad.E = 2.0 * M22.transpose();
  grad.F = 2.0 * M12.transpose() * plant.C().transpose() +
           2.0 * Y22 * K.B_K * plant.V();
  grad.G = 2.0 * plant.R() * K.C_K * X22 +
           2.0 * plant.B().transpose() * M21.transpose();
  return grad;
}

RiemannianGradientResult RiemannianGradient(const Plant& plant,
                                            const Controller& K,
                                            const MetricWeights& weights) {
  // The gradient is equivariant, so it is computed at the balanced
  // realization and mapped back. This keeps the Gram matrix conditioning
  // independent of the coordinates K happens to be given in.
  weights.Validate();
  CheckDimensions(plant, K);
  const BalancedGrammians b = SolveBalancedGrammians(plant, K);
  const BalancingTransform& t = b.t;
  const Controller Kb = Apply(t, K);
  const TangentBasis basis(K.order(), plant.m(), plant.p());
  std::vector<TangentDirection> dirs;
  dirs.reserve(basis.size());
  for (int i = 0; i < basis.size(); ++i) dirs.push_back(basis[i]);
  GramMatrix gram = AssembleGram(plant, b.g, weights, dirs);
  gram.anchor = Kb;
  const CostSensitivity sens = ComputeCostSensitivity(plant, Kb);
  const TangentDirection dJ = EuclideanGradient(plant, Kb, sens);
  const Vector d = basis.Coordinates(dJ);
  const Vector g = SpdSolve(gram.G, d);
  const TangentDirection gb = basis.FromCoordinates(g);

  RiemannianGradientResult r;
  r.cost = sens.cost;
  r.jitter = gram.jitter;
  r.norm_sq = std::max(0.0, d.dot(g));
  r.direction = {t.S_inv * gb.E * t.S, t.S_inv * gb.F, gb.G * t.S};
  // dJ_K(V) = dJ_Kb(dT_S V): pull the Euclidean gradient back.
  const Matrix S_inv_t = t.S_inv.transpose();
  r.differential = basis.Coordinates(TangentDirection{
      t.S.transpose() * dJ.E * S_inv_t, t.S.transpose() * dJ.F, dJ.G * S_inv_t});
  return r;
}

}  // namespace lqgopt
