#pragma once

#include "flatstep/linalg.hpp"

#include <utility>
#include <vector>

namespace flatstep::opcore {

/// Drift/diffusion generator pair. Both must be symmetric to 1e-12 relative.
struct OperatorPair {
  Matrix H;  // drift generator
  Matrix E;  // diffusion generator

  OperatorPair(Matrix h, Matrix e);
  int dim() const { return static_cast<int>(H.rows()); }
};

/// Truncated formal logarithm: coeffs[k] multiplies h^{k+1}.
struct JetSeries {
  std::vector<Matrix> coeffs;

  JetSeries() = default;
  explicit JetSeries(std::vector<Matrix> c);
  int order() const { return static_cast<int>(coeffs.size()); }
  int dim() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs[0].rows()); }
  /// Coefficient of h^k (k >= 1); zero matrix beyond the truncation order.
  Matrix coeff(int k) const;
  /// Evaluate sum_k h^k coeffs[k-1].
  Matrix eval(double h) const;
  /// Squared l2 norm over coefficients: sum_k ||coeffs[k]||_F^2.
  double norm2() const;
};

JetSeries jet_add(const JetSeries& x, const JetSeries& y);
JetSeries jet_scale(const JetSeries& x, double s);
/// Graded commutator of truncated series, kept through h^max_order.
JetSeries jet_commutator(const JetSeries& x, const JetSeries& y, int max_order);
/// Jet of log((I + hA)^{-1}) = -hA + h^2 A^2/2 - h^3 A^3/3 + ... through h^order.
JetSeries resolvent_log_jet(const Matrix& a, int order);

struct HolonomyReport {
  double h = 0.0;
  Matrix log_hol;
  Matrix leading_commutator;  // h^2 [E,H], the degree-2 term of log Hol
  double energy = 0.0;        // ||log_hol||_F^2
};

/// Holonomy of the elementary rectangle for resolvent updates
/// r(h) = (I+hH)^{-1}, d(h) = (I+hE)^{-1}:
///   Hol = d r d^{-1} r^{-1},  log_hol = logm(Hol).
HolonomyReport holonomy(const OperatorPair& pair, double h);

/// Coefficients of log(exp X * exp Y) through h^order (order <= 4).
/// Degree-by-degree BCH with the nested brackets through total degree 4.
JetSeries bch_compose(const JetSeries& x, const JetSeries& y, int order);

/// Largest m <= alpha with ||[X_k, Y_l]||_F <= tol for every k+l <= m.
/// (Brackets start at total degree 2, so the result is always >= 1.)
int jet_flatness_order(const JetSeries& x, const JetSeries& y, int alpha, double tol);

/// Sum of ||log Hol||_F^2 over a list of rectangles.
double curvature_energy(const std::vector<HolonomyReport>& reports);

/// One-axis energies from consecutive differences:
///   S_t = sum_k ||(1/2)[Psi_{k+1}-Psi_k, Omega_k]||^2,
///   S_s = sum_k ||(1/2)[Psi_k, Omega_{k+1}-Omega_k]||^2,
/// with the graded bracket of truncated jets and the coefficient l2 norm.
std::pair<double, double> axis_energies(const std::vector<JetSeries>& jets_t,
                                        const std::vector<JetSeries>& jets_s);

}  // namespace flatstep::opcore
