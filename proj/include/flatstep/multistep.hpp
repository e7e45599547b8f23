#pragma once

#include "flatstep/linalg.hpp"

#include <complex>
#include <vector>

namespace flatstep::spectral {

/// General linear m-step method
///   x_{k+1} = x_k - sum_j eta_j grad f(x_{k-j}) + sum_j gamma_j (x_{k+1-j} - x_{k-j}).
/// On a lambda-mode this induces y_{k+1} = sum_{j=0}^m alpha_j(lambda) y_{k-j} with
///   alpha_0 = 1 - eta0*lambda + gamma1,
///   alpha_j = gamma_{j+1} - eta_j*lambda        (1 <= j <= m-1),
///   alpha_m = -(gamma_m - eta_m*lambda),
/// and characteristic polynomial chi(r) = r^{m+1} - sum_j alpha_j r^{m-j}.
/// (For m=1: chi(r) = r^2 - a r + b, a = 1-eta0*lambda+gamma1, b = gamma1-eta1*lambda.)
struct MethodCoefficients {
  int m = 1;
  std::vector<double> eta;    // size m+1
  std::vector<double> gamma;  // size m

  MethodCoefficients(int m_, std::vector<double> eta_, std::vector<double> gamma_);
  static MethodCoefficients gradient_descent(double eta0) { return {1, {eta0, 0.0}, {0.0}}; }
  static MethodCoefficients heavy_ball(double eta0, double gamma1) {
    return {1, {eta0, 0.0}, {gamma1}};
  }
};

/// AR coefficients alpha_0..alpha_m of the modal recurrence at curvature lambda.
std::vector<double> recurrence_coeffs(const MethodCoefficients& c, double lambda);

/// Monic coefficient list of chi_lambda, descending powers: [1, -alpha_0, ..., -alpha_m].
std::vector<double> char_poly(const MethodCoefficients& c, double lambda);

/// (m+1)x(m+1) companion matrix of chi_lambda (first row = alpha, subdiagonal ones).
Matrix companion(const MethodCoefficients& c, double lambda);

/// Roots of chi_lambda via companion eigenvalues (any m).
std::vector<std::complex<double>> modal_roots(const MethodCoefficients& c, double lambda);

/// Finite spectral measure: atoms (lambda, weight) supported in [mu, L].
struct SpectralMeasure {
  struct Atom {
    double lambda;
    double weight;
  };
  std::vector<Atom> atoms;
  double mu = 0.0;
  double L = 0.0;

  SpectralMeasure(std::vector<Atom> atoms_, double mu_, double L_);
  static SpectralMeasure single(double lambda, double weight = 1.0) {
    return SpectralMeasure({{lambda, weight}}, lambda, lambda);
  }
};

struct ModalMultipliers {
  double lambda = 0.0;
  std::vector<std::complex<double>> roots;
  double rho_max = 0.0;
  bool oscillatory = false;
  double rho = 0.0;    // modulus of the conjugate pair (oscillatory case, m=1)
  double theta = 0.0;  // phase in (0, pi) (oscillatory case, m=1)
};

/// Closed-form quadratic roots for m=1: r = (a +- sqrt(a^2 - 4b))/2.
/// Oscillatory when a^2 - 4b < 0; then rho = sqrt(b), cos(theta) = a/(2 sqrt(b)).
ModalMultipliers modal_multipliers_m1(const MethodCoefficients& c, double lambda);

/// Jury conditions for the m=1 quadratic: 1-b>0, 1+a+b>0, 1-a+b>0.
bool jury_stable_m1(const MethodCoefficients& c, double lambda);

struct StabilityReport {
  bool schur_stable = false;
  double rho_bar = 0.0;
  std::vector<double> violations;
};

/// Worst-case root modulus over a uniform lambda grid on [mu, L].
StabilityReport stability_report(const MethodCoefficients& c, double mu, double L, int grid);

/// Bulk decay exponent A = sum_atoms w * sum_i log(1/|r_i(lambda)|).
/// Roots with |r| <= 1e-300 are skipped (they annihilate their subspace in one
/// step; the formal contribution would be +inf).
double bulk_exponent(const MethodCoefficients& c, const SpectralMeasure& nu);

/// Oscillatory set E_osc = {lambda : a(lambda)^2 - 4 b(lambda) < 0} for m=1.
bool in_oscillatory_set_m1(const MethodCoefficients& c, double lambda);

/// d theta / d lambda on the oscillatory set (explicit rational formula).
double theta_prime_m1(const MethodCoefficients& c, double lambda);

/// Stationary points of theta on E_osc intersected with [mu, L]: the root of
/// the stationary equation, lambda* = (2 eta0 gamma1 - eta1 (1+gamma1)) /
/// (eta0 eta1), when it lies inside, plus the E_osc component endpoints
/// clipped to the band.
std::vector<double> stationary_points_m1(const MethodCoefficients& c, double mu, double L);

/// Airy amplitude at an interior stationary point:
///   c = (1/sqrt(pi)) * sqrt(rho/(1-rho^2)) * |theta''|^{-1/2}, phase = pi/4.
/// theta'' from central differences of theta_prime_m1 (step 1e-5, one Richardson pass).
std::pair<double, double> airy_amplitude(const MethodCoefficients& c, double lambda_star);

/// Stokes jump at a wall point (|r|=1 or zero discriminant, checked to 1e-8):
///   ratio = (eta0 r + eta1) / (2r - a(lambda));
///   returns (log|det S| = arg(ratio)/(2 pi), arg det S = Im log(ratio)).
std::pair<double, double> stokes_jump_m1(const MethodCoefficients& c, double lambda_wall,
                                         std::complex<double> r_wall);

/// Measure-resolved bound sum_atoms w * rho_max(lambda)^{2k} * C_init * stokes_product.
double nonasymptotic_bound(const MethodCoefficients& c, const SpectralMeasure& nu,
                           double C_init, int k, double stokes_product = 1.0);

/// Residual polynomial of the degree-N Chebyshev semi-iteration on [mu, L],
/// p_N(lambda) = T_N((L+mu-2 lambda)/(L-mu)) / T_N((L+mu)/(L-mu)), p_N(0) = 1.
struct ChebyshevFilter {
  int N;
  double mu, L;

  ChebyshevFilter(int N_, double mu_, double L_);
  double evaluate(double lambda) const;
  /// sup over a uniform grid of |p_N| on [mu, L].
  double sup_residual(int grid) const;
  /// sup over a uniform grid of |p_N(lambda) - exp(-N h lambda)| on [mu, L].
  double sup_exp_gap(double h, int grid) const;
  /// Monomial coefficients in lambda (ascending); stable only for small N.
  std::vector<double> monomial_coeffs() const;
  /// T_N((L+mu)/(L-mu)); sup_residual equals 1/T_N at the equioscillation points.
  double tn_at_reference() const;
};

}  // namespace flatstep::spectral
