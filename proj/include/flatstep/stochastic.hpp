#pragma once

#include "flatstep/linalg.hpp"
#include "flatstep/multistep.hpp"

#include <map>
#include <vector>

namespace flatstep::noise {

using spectral::MethodCoefficients;
using spectral::SpectralMeasure;

/// Per-atom gradient-noise variance sigma^2(lambda) and the base RNG seed.
struct NoiseModel {
  std::map<double, double> sigma2;  // lambda -> variance (>= 0)
  std::uint64_t seed = 0;

  double sigma2_at(double lambda) const;
};

/// Modal ARMA state conventions, m=1 (AR(2) + MA(1) innovation):
///   y_{k+1} = a y_k + b y_{k-1} - eta0 xi_k - eta1 xi_{k-1},
///   a = 1 - eta0*lambda + gamma1,  b = -(gamma1 - eta1*lambda).
/// (b here carries the opposite sign from the gamma1 - eta1*lambda quantity
/// used by the spectral module; conversion happens at this boundary.)
struct StationaryCovariance {
  double lambda = 0.0;
  Matrix P;          // (m+1)x(m+1), symmetric PSD
  double p11 = 0.0;  // top-left entry
};

/// Simulate the modal recurrence for k steps. y_init supplies the m+1 most
/// recent values, newest first. Returns the trajectory y_1..y_k.
std::vector<double> simulate_modal(const MethodCoefficients& coeffs, double lambda,
                                   const NoiseModel& noise, const std::vector<double>& y_init,
                                   long k);

/// Closed-form stationary variance for m=1:
///   p11 = sigma^2 (eta0^2 + eta1^2) / D,  D = 1 - a^2 - b^2 - 2 a^2 b / (1-b).
double p11_closed_m1(const MethodCoefficients& coeffs, double lambda, double sigma2);

/// Stationary covariance from the vectorized Lyapunov solve
///   vec P = (I - A (x) A)^{-1} vec Q,  Q = sigma^2 (sum_j eta_j^2) e1 e1^T.
StationaryCovariance lyap_vec(const MethodCoefficients& coeffs, double lambda, double sigma2);

/// Stationary noise floor (1/2) sum_atoms w * lambda * p11(lambda).
double noise_floor(const MethodCoefficients& coeffs, const SpectralMeasure& nu,
                   const NoiseModel& noise);

/// Spectral-radius upper bound:
///   (1/2) sum_atoms w * lambda * sigma^2 sum_j eta_j^2 / (1 - rho(A(lambda))^2).
double floor_upper_bound(const MethodCoefficients& coeffs, const SpectralMeasure& nu,
                         const NoiseModel& noise);

/// Stationary variance from the power spectral density of the ARMA transfer
///   H(z) = -sum_j eta_j z^{-j} / (1 - sum_j alpha_j z^{-(j+1)}),
/// trapezoid quadrature over omega in [-pi, pi] with n_omega points.
double psd_variance(const MethodCoefficients& coeffs, double lambda, double sigma2,
                    int n_omega);

struct ExpectationBoundTerms {
  double determinantal = 0.0;
  double floor = 0.0;
  double tail = 0.0;
  bool heuristic_tail = false;  // true for m >= 2 (max-modulus root substituted)
  double value() const { return determinantal + floor + tail; }
};

/// Three-term expectation bound: determinantal exponential + exact stationary
/// floor + oscillatory covariance tail (ringing) upper bound.
ExpectationBoundTerms expectation_bound_terms(const MethodCoefficients& coeffs,
                                              const SpectralMeasure& nu,
                                              const NoiseModel& noise, double C_det, long k);

double expectation_bound(const MethodCoefficients& coeffs, const SpectralMeasure& nu,
                         const NoiseModel& noise, double C_det, long k);

/// Index of the DFT magnitude peak of a real series over bins 1..n/2; returns
/// the peak frequency in radians per step (bin * 2 pi / n).
double dominant_frequency(const std::vector<double>& series);

/// Near-wall log-magnitude variance scale,
///   sum_atoms w * sigma^2 |sum_j eta_j r_+^j|^2 / (1 - |r_+|)^2,
/// a diagnostic for how strongly noise rattles modes close to the unit
/// circle; no crossing process is simulated.
double stokes_trigger_scale(const MethodCoefficients& coeffs, const SpectralMeasure& nu,
                            const NoiseModel& noise);

}  // namespace flatstep::noise
