#pragma once

#include "flatstep/calibration.hpp"
#include "flatstep/ellipsoid.hpp"
#include "flatstep/multistep.hpp"
#include "flatstep/operator_core.hpp"
#include "flatstep/stochastic.hpp"

#include <vector>

namespace flatstep::protocols {

/// Gauge-conjugated reference operator expm(hZ) (I - hS) expm(-hZ) with the
/// full matrix exponential for the gauge factors; Z from gauge_for_pair, so
/// ZS - SZ = C and the conjugation reproduces the calibrated operator
/// I - hS - h^2 C through second order.
Matrix gauge_reference_op(const opcore::OperatorPair& pair, double h, const Matrix& Z);

struct CalibrationSlopes {
  std::vector<double> h;
  std::vector<double> err_plain;     // (I-hE)(I-hH) vs reference
  std::vector<double> err_a;         // variant A operator vs variant B operator
  std::vector<double> err_b;         // variant B operator vs reference
  std::vector<double> err_filtered;  // filtered operator vs reference
  double slope_plain = 0.0, slope_a = 0.0, slope_b = 0.0, slope_filtered = 0.0;
};

/// One-step operator errors across a log-spaced h grid.
CalibrationSlopes calibration_slopes(const opcore::OperatorPair& pair, double h_lo,
                                     double h_hi, int n_h, double rho);

/// Random symmetric noncommuting pair with moderate spectra.
opcore::OperatorPair random_pair(SplitMix64& rng, int dim, double scale = 0.6);

/// Initial-condition envelope for one mode: decompose the m+1 start values in
/// the root basis of the modal recurrence, return (sum_i |c_i|)^2. The modal
/// solution then obeys |y_k| <= envelope^(1/2) * rho_max^k for all k >= 0.
double modal_envelope(const spectral::MethodCoefficients& coeffs, double lambda,
                      const std::vector<double>& y_init);

/// f-weighted envelope sum_atoms w * (lambda/2) * envelope(lambda) for the
/// quadratic f(x) = (1/2) sum lambda_i x_i^2 started from per-mode values.
double quadratic_envelope(const spectral::MethodCoefficients& coeffs,
                          const spectral::SpectralMeasure& nu,
                          const std::vector<double>& y_init);

/// Deterministic quadratic objective error f(x_k) - f* of the m-step method,
/// all modes started at y_init per mode.
std::vector<double> quadratic_objective_trace(const spectral::MethodCoefficients& coeffs,
                                              const spectral::SpectralMeasure& nu,
                                              const std::vector<double>& y_init, long k);

/// Random polytope containing ball(center, r) and contained in ball(0, R).
struct BallPolytope {
  std::vector<Vector> normals;  // unit rows a_i
  std::vector<double> offsets;  // a_i^T x <= b_i
  Vector center;                // promised interior ball center
  double R = 0.0, r = 0.0;

  ellipsoid::Oracle oracle() const;
  bool contains(const Vector& x) const;
};

BallPolytope random_ball_polytope(SplitMix64& rng, int n, double R, double r, int n_faces);

/// Count sign-alternating extrema of the Chebyshev residual of equal
/// magnitude within tol, on a fine grid.
int equioscillation_count(const spectral::ChebyshevFilter& f, int grid, double tol);

}  // namespace flatstep::protocols
