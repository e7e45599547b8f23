#pragma once

#include "flatstep/linalg.hpp"
#include "flatstep/operator_core.hpp"

#include <functional>
#include <map>
#include <string>
#include <tuple>

namespace flatstep::calib {

using opcore::OperatorPair;

struct GaugeSolution {
  Matrix Z;
  double residual = 0.0;  // ||SZ - ZS - C||_F / ||C||_F, recomputed post hoc
  double damping = 0.0;   // tau actually used
  double centralizer_norm = 0.0;  // norm of the right-hand-side part projected out
};

/// Solve S Z - Z S = C in the Schur basis of S with damped entrywise division
///   Zhat_ij = Chat_ij / ((t_ii - t_jj) + tau),  tau = eps * ||S||_2, Zhat_ii = 0.
GaugeSolution sylvester_schur(const Matrix& S, const Matrix& C, double eps);

/// Symmetric S: S = U diag(lambda) U^T and
///   Ztil_ij = Ctil_ij (lambda_i - lambda_j) / ((lambda_i - lambda_j)^2 + tau^2).
GaugeSolution sylvester_eigen(const Matrix& S, const Matrix& C, double tau);

enum class StepVariant { A, B, Filtered, Plain };

struct StepResult {
  Vector x_next;
  StepVariant variant = StepVariant::Plain;
  double h = 0.0;
  std::map<std::string, double> diagnostics;
};

/// Explicit gauge variant: x+ = W(h) (I - hS) W(h)^{-1} (x - h g),
/// W^{+-1} v applied by the 3-term series v +- hZv + (h^2/2) Z^2 v.
/// Expects Z from a Sylvester solve of [Z,S] = C (i.e. ZS - SZ = C) with
/// S = H+E, C = (1/2)[H,E]; pass gauge_for_pair(pair).Z.
StepResult calibrated_step_A(const OperatorPair& pair, const Vector& x, const Vector& g,
                             double h, const Matrix& Z);

/// Gauge-free commutator correction: x+ = x - h S g - h^2 C g.
StepResult calibrated_step_B(const OperatorPair& pair, const Vector& x, const Vector& g,
                             double h);

/// Curvature-filtered composite step (four matvecs):
///   x+ = x - h ((H+E)g - s * (1/2)(H(Eg) - E(Hg))),
///   s  = min{1, rho ||(H+E)g|| / ||[H,E]g||}.
StepResult curvature_filtered_step(const OperatorPair& pair, const Vector& x, const Vector& g,
                                   double h, double rho);

/// Gauge for the calibrated step: Z with ZS - SZ = C (the sign that absorbs the
/// leading commutator of the composed update). Solved through sylvester_eigen
/// on the symmetric S = H+E with right-hand side -C.
GaugeSolution gauge_for_pair(const OperatorPair& pair, double tau = 0.0);

enum class ApplyOrder { dr, rd };

struct OrderSelection {
  double h = 0.0;
  double lambda_hat = 0.0;
  double delta = 0.0;
  ApplyOrder order_chosen = ApplyOrder::dr;
  int halvings = 0;
};

using ApplyFn = std::function<Vector(const Vector&)>;

/// Matrix-free order selection: two power-iteration steps on A+B estimate
/// lambda_max; h = min{h_max, 2(1-sigma)/lambda_hat}; the finite-h diagnostic
///   delta = ||u1 - u2|| / (h ||g||),  u1 = (I-hB)(I-hA)g, u2 = (I-hA)(I-hB)g,
/// is halved-down until delta <= tau_diag or the halving cap is hit.
OrderSelection select_order(const ApplyFn& applyA, const ApplyFn& applyB, const Vector& g,
                            double h_max, double sigma, double tau_diag, int max_halvings);

/// A square B = (A^{-1} + B^{-1})^{-1} for SPD A, B.
Matrix parallel_sum(const Matrix& A, const Matrix& B);

/// Parallel projection toward data-driven targets:
///   H+ = ((1-eta) H^{-1} + eta Htarget^{-1})^{-1}, same for E with zeta;
///   G+ = H+ square E+.  Returns (H+, E+, G+).
std::tuple<Matrix, Matrix, Matrix> adaptive_update(const Matrix& H, const Matrix& E,
                                                   const Matrix& H_target,
                                                   const Matrix& E_target, double eta,
                                                   double zeta);

}  // namespace flatstep::calib
