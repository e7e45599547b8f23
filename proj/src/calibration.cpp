#include "flatstep/calibration.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>

namespace flatstep::calib {

namespace {

double rel_residual(const Matrix& S, const Matrix& Z, const Matrix& C) {
  const double nc = C.norm();
  if (nc == 0.0) return (S * Z - Z * S).norm();
  return (S * Z - Z * S - C).norm() / nc;
}

}  // namespace

GaugeSolution sylvester_schur(const Matrix& S, const Matrix& C, double eps) {
  require_square(S, "sylvester_schur");
  require_same_dim(S, C, "sylvester_schur");
  require_finite(S, "sylvester_schur");
  require_finite(C, "sylvester_schur");

  Eigen::RealSchur<Matrix> schur(S);
  if (schur.info() != Eigen::Success)
    fail(ErrKind::NumericalError, "sylvester_schur: Schur factorization failed");
  const Matrix Q = schur.matrixU();
  const Matrix T = schur.matrixT();
  const Matrix Chat = Q.transpose() * C * Q;

  const double snorm2 = S.operatorNorm();
  const double tau = eps * snorm2;

  const int n = static_cast<int>(S.rows());
  Matrix Zhat = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double denom = (T(i, i) - T(j, j)) + tau;
      Zhat(i, j) = (std::abs(denom) < 1e-300) ? 0.0 : Chat(i, j) / denom;
    }

  GaugeSolution out;
  out.Z = Q * Zhat * Q.transpose();
  out.damping = tau;
  out.residual = rel_residual(S, out.Z, C);
  return out;
}

GaugeSolution sylvester_eigen(const Matrix& S, const Matrix& C, double tau) {
  require_square(S, "sylvester_eigen");
  require_same_dim(S, C, "sylvester_eigen");
  if (symmetry_defect(S) > 1e-10)
    fail(ErrKind::InvalidInput, "sylvester_eigen: S must be symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success)
    fail(ErrKind::NumericalError, "sylvester_eigen: eigendecomposition failed");
  const Matrix& U = es.eigenvectors();
  const Vector& lam = es.eigenvalues();
  const Matrix Ctil = U.transpose() * C * U;

  const int n = static_cast<int>(S.rows());
  Matrix Ztil = Matrix::Zero(n, n);
  double central = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        central += Ctil(i, i) * Ctil(i, i);
        continue;
      }
      const double gap = lam[i] - lam[j];
      Ztil(i, j) = Ctil(i, j) * gap / (gap * gap + tau * tau);
    }

  GaugeSolution out;
  out.Z = U * Ztil * U.transpose();
  out.damping = tau;
  out.residual = rel_residual(S, out.Z, C);
  out.centralizer_norm = std::sqrt(central);
  return out;
}

GaugeSolution gauge_for_pair(const OperatorPair& pair, double tau) {
  const Matrix S = pair.H + pair.E;
  const Matrix C = 0.5 * commutator(pair.H, pair.E);
  // ZS - SZ = C  <=>  S Z - Z S = -C.
  return sylvester_eigen(S, -C, tau);
}

StepResult calibrated_step_A(const OperatorPair& pair, const Vector& x, const Vector& g,
                             double h, const Matrix& Z) {
  if (x.size() != pair.dim() || g.size() != pair.dim())
    fail(ErrKind::InvalidInput, "calibrated_step_A: size mismatch");
  require_finite(Z, "calibrated_step_A");
  const Matrix S = pair.H + pair.E;

  auto gauge_apply = [&](const Vector& v, double sgn) {
    return (v + sgn * h * (Z * v) + 0.5 * h * h * (Z * (Z * v))).eval();
  };

  const Vector v0 = x - h * g;
  const Vector v1 = gauge_apply(v0, -1.0);      // W^{-1} v0
  const Vector v2 = v1 - h * (S * v1);          // (I - hS) v1
  StepResult r;
  r.variant = StepVariant::A;
  r.h = h;
  r.x_next = gauge_apply(v2, +1.0);             // W v2
  r.diagnostics["gauge_norm"] = Z.norm();
  r.diagnostics["commutator_term_norm"] =
      (h * h * 0.5 * (pair.H * (pair.E * g) - pair.E * (pair.H * g))).norm();
  if (!all_finite(r.x_next)) fail(ErrKind::NumericalError, "calibrated_step_A: non-finite");
  return r;
}

StepResult calibrated_step_B(const OperatorPair& pair, const Vector& x, const Vector& g,
                             double h) {
  if (x.size() != pair.dim() || g.size() != pair.dim())
    fail(ErrKind::InvalidInput, "calibrated_step_B: size mismatch");
  StepResult r;
  r.variant = StepVariant::B;
  r.h = h;
  const Vector Sg = pair.H * g + pair.E * g;
  const Vector Cg = 0.5 * (pair.H * (pair.E * g) - pair.E * (pair.H * g));
  r.x_next = x - h * Sg - h * h * Cg;
  r.diagnostics["commutator_term_norm"] = (h * h * Cg).norm();
  if (!all_finite(r.x_next)) fail(ErrKind::NumericalError, "calibrated_step_B: non-finite");
  return r;
}

StepResult curvature_filtered_step(const OperatorPair& pair, const Vector& x, const Vector& g,
                                   double h, double rho) {
  if (!(rho > 0.0 && rho <= 1.0))
    fail(ErrKind::InvalidInput, "curvature_filtered_step: rho in (0,1] required");
  if (x.size() != pair.dim() || g.size() != pair.dim())
    fail(ErrKind::InvalidInput, "curvature_filtered_step: size mismatch");

  const Vector Hg = pair.H * g;
  const Vector Eg = pair.E * g;
  const Vector HEg = pair.H * Eg;
  const Vector EHg = pair.E * Hg;
  const Vector sum_g = Hg + Eg;        // (H+E) g
  const Vector comm_g = HEg - EHg;     // [H,E] g

  double scale = 1.0;
  const double nc = comm_g.norm();
  if (nc > 0.0) scale = std::min(1.0, rho * sum_g.norm() / nc);

  StepResult r;
  r.variant = StepVariant::Filtered;
  r.h = h;
  r.x_next = x - h * (sum_g - 0.5 * scale * comm_g);
  r.diagnostics["safeguard_scale"] = scale;
  r.diagnostics["norm_Hg"] = Hg.norm();
  r.diagnostics["norm_Eg"] = Eg.norm();
  r.diagnostics["norm_HEg"] = HEg.norm();
  r.diagnostics["norm_EHg"] = EHg.norm();
  if (!all_finite(r.x_next)) fail(ErrKind::NumericalError, "curvature_filtered_step: non-finite");
  return r;
}

OrderSelection select_order(const ApplyFn& applyA, const ApplyFn& applyB, const Vector& g,
                            double h_max, double sigma, double tau_diag, int max_halvings) {
  if (!(sigma > 0.0 && sigma < 0.5))
    fail(ErrKind::InvalidInput, "select_order: sigma in (0, 1/2) required");
  const double gn = g.norm();
  if (gn == 0.0) fail(ErrKind::InvalidInput, "select_order: zero g");

  long calls_a = 0, calls_b = 0;
  auto A = [&](const Vector& v) { ++calls_a; return applyA(v); };
  auto B = [&](const Vector& v) { ++calls_b; return applyB(v); };
  auto S = [&](const Vector& v) { return (A(v) + B(v)).eval(); };

  // Two power-iteration steps on A+B from v0 = g/||g||.
  Vector v = g / gn;
  for (int k = 0; k < 2; ++k) {
    Vector w = S(v);
    const double wn = w.norm();
    if (wn == 0.0) fail(ErrKind::NumericalError, "select_order: power iteration collapsed");
    v = w / wn;
  }
  const double lambda_hat = v.dot(S(v));
  if (!(lambda_hat > 0.0))
    fail(ErrKind::NumericalError, "select_order: nonpositive lambda estimate");

  OrderSelection sel;
  sel.lambda_hat = lambda_hat;
  sel.h = std::min(h_max, 2.0 * (1.0 - sigma) / lambda_hat);

  long cost_dr = 0, cost_rd = 0;
  for (sel.halvings = 0; sel.halvings <= max_halvings; ++sel.halvings) {
    const double h = sel.h;
    const long a0 = calls_a, b0 = calls_b;
    const Vector ag = A(g);
    const Vector u1 = (g - h * ag) - h * B(g - h * ag);  // (I-hB)(I-hA) g
    cost_dr = (calls_a - a0) + (calls_b - b0);
    const long a1 = calls_a, b1 = calls_b;
    const Vector bg = B(g);
    const Vector u2 = (g - h * bg) - h * A(g - h * bg);  // (I-hA)(I-hB) g
    cost_rd = (calls_a - a1) + (calls_b - b1);
    sel.delta = (u1 - u2).norm() / (h * gn);
    if (sel.delta <= tau_diag) break;
    if (sel.halvings == max_halvings) break;  // cap reached, flag via halvings
    sel.h *= 0.5;
  }
  sel.order_chosen = (cost_rd < cost_dr) ? ApplyOrder::rd : ApplyOrder::dr;
  return sel;
}

Matrix parallel_sum(const Matrix& A, const Matrix& B) {
  require_same_dim(A, B, "parallel_sum");
  if (!is_spd(A) || !is_spd(B)) fail(ErrKind::InvalidInput, "parallel_sum: inputs must be SPD");
  const Matrix sum_inv = A.inverse() + B.inverse();
  Matrix out = sum_inv.inverse();
  return 0.5 * (out + out.transpose());
}

std::tuple<Matrix, Matrix, Matrix> adaptive_update(const Matrix& H, const Matrix& E,
                                                   const Matrix& H_target,
                                                   const Matrix& E_target, double eta,
                                                   double zeta) {
  if (!(eta >= 0.0 && eta <= 1.0 && zeta >= 0.0 && zeta <= 1.0))
    fail(ErrKind::InvalidInput, "adaptive_update: eta, zeta in [0,1] required");
  for (const Matrix* m : {&H, &E, &H_target, &E_target})
    if (!is_spd(*m)) fail(ErrKind::InvalidInput, "adaptive_update: inputs must be SPD");

  auto blend = [](const Matrix& X, const Matrix& Xt, double w) {
    const Matrix inv = (1.0 - w) * X.inverse() + w * Xt.inverse();
    Matrix out = inv.inverse();
    return (0.5 * (out + out.transpose())).eval();
  };
  Matrix Hn = blend(H, H_target, eta);
  Matrix En = blend(E, E_target, zeta);
  Matrix Gn = parallel_sum(Hn, En);
  return {std::move(Hn), std::move(En), std::move(Gn)};
}

}  // namespace flatstep::calib
