#include "lqgopt/lqg.h"

#include <cmath>
#include <limits>
#include <sstream>

namespace lqgopt {

namespace {

std::string Shape(const Matrix& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}

Matrix BlockDiag(const MatrixRef& top, const MatrixRef& bottom) {
  Matrix out = Matrix::Zero(top.rows() + bottom.rows(),
                            top.cols() + bottom.cols());
  out.topLeftCorner(top.rows(), top.cols()) = top;
  out.bottomRightCorner(bottom.rows(), bottom.cols()) = bottom;
  return out;
}

// Lyapunov solve on a closed-loop matrix; non-Hurwitz maps to NotStabilizing.
Matrix ClosedLoopLyapunov(const MatrixRef& A, const MatrixRef& Q) {
  try {
    return SolveLyapunov(A, Q);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotHurwitz) {
      throw Error(ErrorCode::kNotStabilizing, e.what());
    }
    throw;
  }
}

struct CostDirections {
  Matrix E_hat;
  Matrix dQ_cl;
  Matrix dW_cl;
};

CostDirections DirectionsOf(const Plant& plant, const Controller& K,
                            const TangentDirection& V) {
  const int n = plant.n();
  const int q = K.order();
  CostDirections d;
  d.E_hat = ClosedLoopStateDirection(plant, V);
  d.dQ_cl = Matrix::Zero(n + q, n + q);
  d.dQ_cl.bottomRightCorner(q, q) = V.G.transpose() * plant.R() * K.C_K +
                                    K.C_K.transpose() * plant.R() * V.G;
  d.dW_cl = Matrix::Zero(n + q, n + q);
  d.dW_cl.bottomRightCorner(q, q) = V.F * plant.V() * K.B_K.transpose() +
                                    K.B_K * plant.V() * V.F.transpose();
  return d;
}

}  // namespace

std::vector<PlantCheck> CheckPlant(const PlantMatrices& d, double tol) {
  std::vector<PlantCheck> checks;
  const auto n = d.A.rows();
  const auto m = d.B.cols();
  const auto p = d.C.rows();
  {
    PlantCheck c{"dimensions", true, ""};
    std::ostringstream os;
    auto expect = [&](const char* name, const Matrix& M, Eigen::Index r,
                      Eigen::Index k) {
      if (M.rows() != r || M.cols() != k) {
        c.passed = false;
        os << name << " is " << Shape(M) << ", expected " << r << "x" << k
           << "; ";
      }
    };
    if (n == 0 || m == 0 || p == 0) {
      c.passed = false;
      os << "empty A, B or C; ";
    }
    expect("A", d.A, n, n);
    expect("B", d.B, n, m);
    expect("C", d.C, p, n);
    expect("W", d.W, n, n);
    expect("V", d.V, p, p);
    expect("Q", d.Q, n, n);
    expect("R", d.R, m, m);
    c.detail = os.str();
    checks.push_back(c);
    if (!c.passed) return checks;
  }
  {
    const bool finite = AllFinite(d.A) && AllFinite(d.B) && AllFinite(d.C) &&
                        AllFinite(d.W) && AllFinite(d.V) && AllFinite(d.Q) &&
                        AllFinite(d.R);
    checks.push_back({"finite entries", finite, finite ? "" : "NaN or Inf"});
    if (!finite) return checks;
  }
  auto psd = [&](const char* name, const Matrix& M) {
    const bool sym = IsSymmetric(M);
    const bool ok = sym && IsPositiveSemidefinite(M);
    checks.push_back({std::string(name) + " symmetric positive semidefinite",
                      ok, sym ? (ok ? "" : "negative eigenvalue")
                              : "not symmetric"});
  };
  auto pd = [&](const char* name, const Matrix& M) {
    const bool sym = IsSymmetric(M);
    const bool ok = sym && IsPositiveDefinite(M);
    checks.push_back({std::string(name) + " symmetric positive definite", ok,
                      sym ? (ok ? "" : "not positive definite")
                          : "not symmetric"});
  };
  psd("W", d.W);
  pd("V", d.V);
  psd("Q", d.Q);
  pd("R", d.R);
  auto rank = [&](const char* name, const RankMargin& margin) {
    std::ostringstream os;
    os << "min singular value " << margin.min_sv << ", max "
       << margin.max_sv;
    checks.push_back({name, margin.FullRank(tol), os.str()});
  };
  rank("(A,B) controllable", ControllabilityMargin(d.A, d.B));
  rank("(A,W^1/2) controllable", ControllabilityMargin(d.A, PsdSqrt(d.W)));
  rank("(A,C) observable", ObservabilityMargin(d.A, d.C));
  rank("(A,Q^1/2) observable", ObservabilityMargin(d.A, PsdSqrt(d.Q)));
  return checks;
}

Plant::Plant(PlantMatrices data, double tol) : data_(std::move(data)) {
  for (const auto& check : CheckPlant(data_, tol)) {
    if (!check.passed) {
      throw Error(ErrorCode::kInvalidPlant,
                  check.name + " violated: " + check.detail);
    }
  }
  data_.W = Symmetrize(data_.W);
  data_.V = Symmetrize(data_.V);
  data_.Q = Symmetrize(data_.Q);
  data_.R = Symmetrize(data_.R);
}

Matrix Controller::Block() const {
  const auto q = A_K.rows();
  const auto p = B_K.cols();
  const auto m = C_K.rows();
  Matrix K = Matrix::Zero(m + q, p + q);
  K.topRightCorner(m, q) = C_K;
  K.bottomLeftCorner(q, p) = B_K;
  K.bottomRightCorner(q, q) = A_K;
  return K;
}

double Controller::Norm() const {
  return std::sqrt(A_K.squaredNorm() + B_K.squaredNorm() +
                   C_K.squaredNorm());
}

TangentDirection TangentDirection::Zero(int q, int m, int p) {
  return {Matrix::Zero(q, q), Matrix::Zero(q, p), Matrix::Zero(m, q)};
}

double TangentDirection::Dot(const TangentDirection& o) const {
  return E.cwiseProduct(o.E).sum() + F.cwiseProduct(o.F).sum() +
         G.cwiseProduct(o.G).sum();
}

double TangentDirection::Norm() const { return std::sqrt(Dot(*this)); }

bool TangentDirection::IsZero() const {
  return E.isZero(0.0) && F.isZero(0.0) && G.isZero(0.0);
}

TangentDirection& TangentDirection::operator+=(const TangentDirection& o) {
  E += o.E;
  F += o.F;
  G += o.G;
  return *this;
}

TangentDirection& TangentDirection::operator-=(const TangentDirection& o) {
  E -= o.E;
  F -= o.F;
  G -= o.G;
  return *this;
}

TangentDirection& TangentDirection::operator*=(double scale) {
  E *= scale;
  F *= scale;
  G *= scale;
  return *this;
}

TangentDirection operator+(TangentDirection a, const TangentDirection& b) {
  return a += b;
}
TangentDirection operator-(TangentDirection a, const TangentDirection& b) {
  return a -= b;
}
TangentDirection operator*(double scale, TangentDirection v) {
  return v *= scale;
}
TangentDirection operator-(TangentDirection v) { return v *= -1.0; }

Controller Retract(const Controller& K, const TangentDirection& V, double t) {
  return {K.A_K + t * V.E, K.B_K + t * V.F, K.C_K + t * V.G};
}

TangentDirection Difference(const Controller& a, const Controller& b) {
  return {a.A_K - b.A_K, a.B_K - b.B_K, a.C_K - b.C_K};
}

void CheckDimensions(const Plant& plant, const Controller& K) {
  const auto q = K.A_K.rows();
  if (q < 1 || q > plant.n() || K.A_K.cols() != q || K.B_K.rows() != q ||
      K.B_K.cols() != plant.p() || K.C_K.rows() != plant.m() ||
      K.C_K.cols() != q) {
    std::ostringstream os;
    os << "controller (A_K " << Shape(K.A_K) << ", B_K " << Shape(K.B_K)
       << ", C_K " << Shape(K.C_K) << ") does not fit plant (n,m,p)=("
       << plant.n() << "," << plant.m() << "," << plant.p() << ")";
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

void CheckDimensions(const Plant& plant, const TangentDirection& V) {
  CheckDimensions(plant, Controller{V.E, V.F, V.G});
}

ClosedLoop AssembleClosedLoop(const Plant& plant, const Controller& K) {
  CheckDimensions(plant, K);
  const int n = plant.n(), m = plant.m(), p = plant.p(), q = K.order();
  ClosedLoop cl;
  cl.A_cl.resize(n + q, n + q);
  cl.A_cl << plant.A(), plant.B() * K.C_K, K.B_K * plant.C(), K.A_K;
  cl.B_cl = BlockDiag(Matrix::Identity(n, n), K.B_K);
  cl.C_cl = BlockDiag(plant.C(), K.C_K);
  cl.D_cl = Matrix::Zero(p + m, n + p);
  cl.D_cl.topRightCorner(p, p).setIdentity();
  cl.Q_cl = BlockDiag(plant.Q(), K.C_K.transpose() * plant.R() * K.C_K);
  cl.W_cl = BlockDiag(plant.W(), K.B_K * plant.V() * K.B_K.transpose());
  return cl;
}

Matrix ClosedLoopStateDirection(const Plant& plant, const TangentDirection& V) {
  CheckDimensions(plant, V);
  const int n = plant.n(), q = V.order();
  Matrix E_hat(n + q, n + q);
  E_hat << Matrix::Zero(n, n), plant.B() * V.G, V.F * plant.C(), V.E;
  return E_hat;
}

Matrix StateCovariance(const Plant& plant, const Controller& K) {
  const ClosedLoop cl = AssembleClosedLoop(plant, K);
  return ClosedLoopLyapunov(cl.A_cl, cl.W_cl);
}

double LqgCost(const Plant& plant, const Controller& K) {
  const ClosedLoop cl = AssembleClosedLoop(plant, K);
  const Matrix X = ClosedLoopLyapunov(cl.A_cl, cl.W_cl);
  return cl.Q_cl.cwiseProduct(X).sum();
}

CostSensitivity ComputeCostSensitivity(const Plant& plant,
                                       const Controller& K) {
  CostSensitivity s;
  s.closed_loop = AssembleClosedLoop(plant, K);
  s.X = ClosedLoopLyapunov(s.closed_loop.A_cl, s.closed_loop.W_cl);
  s.Y = ClosedLoopLyapunov(s.closed_loop.A_cl.transpose(),
                           s.closed_loop.Q_cl);
  s.cost = s.closed_loop.Q_cl.cwiseProduct(s.X).sum();
  return s;
}

double CostDifferential(const Plant& plant, const Controller& K,
                        const TangentDirection& V) {
  return CostDifferential(plant, K, ComputeCostSensitivity(plant, K), V);
}

double CostDifferential(const Plant& plant, const Controller& K,
                        const CostSensitivity& sens,
                        const TangentDirection& V) {
  const CostDirections d = DirectionsOf(plant, K, V);
  const Matrix forcing = d.E_hat * sens.X +
                         sens.X * d.E_hat.transpose() + d.dW_cl;
  // tr(M N) = sum(Mᵀ ∘ N); dQ_cl and Y are symmetric.
  return d.dQ_cl.cwiseProduct(sens.X).sum() +
         sens.Y.cwiseProduct(forcing).sum();
}

double CostDifferentialDirect(const Plant& plant, const Controller& K,
                              const TangentDirection& V) {
  const ClosedLoop cl = AssembleClosedLoop(plant, K);
  const CostDirections d = DirectionsOf(plant, K, V);
  const Matrix X = ClosedLoopLyapunov(cl.A_cl, cl.W_cl);
  Matrix dX;
  try {
    dX = LyapunovDifferential(cl.A_cl, cl.W_cl, d.E_hat, d.dW_cl);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotHurwitz) {
      throw Error(ErrorCode::kNotStabilizing, e.what());
    }
    throw;
  }
  return d.dQ_cl.cwiseProduct(X).sum() + cl.Q_cl.cwiseProduct(dX).sum();
}

namespace {

Matrix CheckedInverse(const MatrixRef& S, Eigen::Index q) {
  if (S.rows() != q || S.cols() != q) {
    throw Error(ErrorCode::kDimensionMismatch,
                "transform must be " + std::to_string(q) + "x" +
                    std::to_string(q));
  }
  if (!AllFinite(S)) {
    throw Error(ErrorCode::kSingularTransform, "non-finite transform");
  }
  Eigen::JacobiSVD<Matrix> svd(S);
  const auto& sv = svd.singularValues();
  if (!(sv(q - 1) > 0.0) || sv(0) / sv(q - 1) >= 1e12) {
    throw Error(ErrorCode::kSingularTransform,
                "transform condition number is at least 1e12");
  }
  return S.partialPivLu().inverse();
}

}  // namespace

Controller CoordinateTransform(const Controller& K, const MatrixRef& S) {
  const Matrix S_inv = CheckedInverse(S, K.A_K.rows());
  return {S * K.A_K * S_inv, S * K.B_K, K.C_K * S_inv};
}

TangentDirection CoordinateTransform(const TangentDirection& V,
                                     const MatrixRef& S) {
  const Matrix S_inv = CheckedInverse(S, V.E.rows());
  return {S * V.E * S_inv, S * V.F, V.G * S_inv};
}

AdmissibilityReport IsAdmissible(const Plant& plant, const Controller& K,
                                 double tol) {
  CheckDimensions(plant, K);
  AdmissibilityReport report;
  report.spectral_abscissa = std::numeric_limits<double>::infinity();
  if (!AllFinite(K.A_K) || !AllFinite(K.B_K) || !AllFinite(K.C_K)) {
    return report;
  }
  const ClosedLoop cl = AssembleClosedLoop(plant, K);
  try {
    report.spectral_abscissa = SpectralAbscissa(cl.A_cl);
  } catch (const Error&) {
    report.spectral_abscissa = std::numeric_limits<double>::infinity();
  }
  report.stabilizing = report.spectral_abscissa < 0.0;
  const RankMargin ctrb = ControllabilityMargin(K.A_K, K.B_K);
  const RankMargin obsv = ObservabilityMargin(K.A_K, K.C_K);
  report.min_sv_ctrb = ctrb.min_sv;
  report.min_sv_obsv = obsv.min_sv;
  report.minimal = ctrb.FullRank(tol) && obsv.FullRank(tol);
  return report;
}

LqgOptimum LqgRiccatiOptimum(const Plant& plant) {
  LqgOptimum opt;
  opt.P = SolveCare(plant.A(), plant.B(), plant.Q(), plant.R());
  opt.Sigma = SolveCare(plant.A().transpose(), plant.C().transpose(),
                        plant.W(), plant.V());
  const Eigen::LLT<Matrix> r_llt(plant.R());
  const Eigen::LLT<Matrix> v_llt(plant.V());
  const Matrix F = r_llt.solve(plant.B().transpose() * opt.P);
  const Matrix L = v_llt.solve(plant.C() * opt.Sigma).transpose();
  opt.controller.A_K = plant.A() - plant.B() * F - L * plant.C();
  opt.controller.B_K = L;
  opt.controller.C_K = -F;
  const Matrix BRinvBt = plant.B() * r_llt.solve(plant.B().transpose());
  opt.cost = (opt.P * plant.W()).trace() +
             (opt.P * BRinvBt * opt.P * opt.Sigma).trace();
  return opt;
}

}  // namespace lqgopt
