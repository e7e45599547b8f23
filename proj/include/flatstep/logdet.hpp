#pragma once

#include "flatstep/linalg.hpp"

#include <functional>

namespace flatstep::logdet {

enum class ProbeKind { rademacher, gaussian };

struct ProbeConfig {
  int n_probes = 32;
  ProbeKind probe_kind = ProbeKind::rademacher;
  std::uint64_t seed = 0;
  int lanczos_steps = 16;
};

struct Estimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  int breakdowns = 0;  // probes whose Lanczos recurrence terminated early
};

/// log det A via the Cholesky factor: 2 sum_i log R_ii.
double logdet_chol(const Matrix& A);

using ApplyFn = std::function<Vector(const Vector&)>;

/// Hutchinson estimator (1/N) sum_i <z_i, M z_i> with Rademacher or Gaussian
/// probes; stderr is the sample standard error across probes.
Estimate hutchinson_trace(const ApplyFn& applyM, int dim, const ProbeConfig& cfg);

/// Stochastic Lanczos quadrature for log det of an SPD matrix:
/// per probe, m Lanczos steps with full reorthogonalization give T_m and
///   theta_i = ||z_i||^2 e_1^T log(T_m) e_1;
/// the probe mean estimates log det A. Lanczos breakdown (beta < 1e-14)
/// truncates that probe's quadrature and is counted in `breakdowns`.
Estimate slq_logdet(const Matrix& A, const ProbeConfig& cfg);

/// Quadratic local model for the density-matching calibration.
struct MAContext {
  double w = 1.0;     // target weight, > 0
  double c = 0.0;
  double S_val = 0.0; // potential value at the point
  Matrix H;           // SPD local Hessian model

  MAContext(double w_, double c_, double S_val_, Matrix H_);
};

/// Density-matching residual  logdet H - log w + c S.
double ma_residual(const MAContext& ctx);

/// Driver of the multiplicative update:  log w - logdet H + c S.
/// (Sign differs from ma_residual whenever cS != 0; both are exposed.)
double residual_printed(const MAContext& ctx);

/// Multiplicative trust-region update
///   H+ = exp(log H + eta (log w - logdet H + cS) I) = e^{eta r} H,
/// an isotropic shift of the log-eigenvalues, so eigenvectors are preserved
/// and the driver recurses as r+ = (1 - n eta) r exactly.
Matrix trust_region_update(const MAContext& ctx, double eta);

}  // namespace flatstep::logdet
