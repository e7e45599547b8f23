#include "flatstep/stochastic.hpp"

#include <Eigen/LU>

#include <cmath>
#include <complex>

namespace flatstep::noise {

double NoiseModel::sigma2_at(double lambda) const {
  auto it = sigma2.find(lambda);
  if (it == sigma2.end()) {
    // Nearest match within a tight relative tolerance, so measure atoms built
    // from the same doubles round-trip safely.
    for (const auto& [lam, s2] : sigma2)
      if (std::abs(lam - lambda) <= 1e-12 * std::max(1.0, std::abs(lambda))) return s2;
    fail(ErrKind::InvalidInput, "NoiseModel: no sigma2 entry for lambda");
  }
  const double s2 = it->second;
  if (!(s2 >= 0.0) || !std::isfinite(s2))
    fail(ErrKind::InvalidInput, "NoiseModel: sigma2 must be finite and >= 0");
  return s2;
}

std::vector<double> simulate_modal(const MethodCoefficients& coeffs, double lambda,
                                   const NoiseModel& noise, const std::vector<double>& y_init,
                                   long k) {
  const int m = coeffs.m;
  if (y_init.size() != static_cast<size_t>(m + 1))
    fail(ErrKind::InvalidInput, "simulate_modal: y_init needs m+1 entries");
  if (k < 1) fail(ErrKind::InvalidInput, "simulate_modal: k >= 1 required");

  const auto alpha = spectral::recurrence_coeffs(coeffs, lambda);
  const double sigma = std::sqrt(noise.sigma2_at(lambda));
  SplitMix64 rng(noise.seed);

  // y[0] newest. xi[j] is the gradient-noise draw at lag j.
  std::vector<double> y(y_init);
  std::vector<double> xi(static_cast<size_t>(m + 1), 0.0);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(k));

  for (long step = 0; step < k; ++step) {
    // Fresh white-noise draw enters at lag 0.
    for (int j = m; j > 0; --j) xi[static_cast<size_t>(j)] = xi[static_cast<size_t>(j - 1)];
    xi[0] = (sigma > 0.0) ? sigma * rng.normal() : 0.0;

    double innov = 0.0;
    for (int j = 0; j <= m; ++j) innov += coeffs.eta[static_cast<size_t>(j)] * xi[static_cast<size_t>(j)];

    double next = -innov;
    for (int j = 0; j <= m; ++j) next += alpha[static_cast<size_t>(j)] * y[static_cast<size_t>(j)];

    for (int j = m; j > 0; --j) y[static_cast<size_t>(j)] = y[static_cast<size_t>(j - 1)];
    y[0] = next;
    out.push_back(next);
  }
  return out;
}

namespace {

// AR(2)/MA(1) parameters in this module's sign convention.
void ar2_params(const MethodCoefficients& c, double lambda, double& a, double& b) {
  a = 1.0 - c.eta[0] * lambda + c.gamma[0];
  b = -(c.gamma[0] - c.eta[1] * lambda);
}

double spectral_radius(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A);
  double rho = 0.0;
  for (int i = 0; i < A.rows(); ++i) rho = std::max(rho, std::abs(es.eigenvalues()[i]));
  return rho;
}

}  // namespace

double p11_closed_m1(const MethodCoefficients& coeffs, double lambda, double sigma2) {
  if (coeffs.m != 1) fail(ErrKind::Unsupported, "p11_closed_m1: m == 1 required");
  if (!spectral::jury_stable_m1(coeffs, lambda))
    fail(ErrKind::OutOfDomain, "p11_closed_m1: mode not Schur stable");
  double a, b;
  ar2_params(coeffs, lambda, a, b);
  if (std::abs(1.0 - b) < 1e-14) fail(ErrKind::OutOfDomain, "p11_closed_m1: b == 1");
  const double D = 1.0 - a * a - b * b - 2.0 * a * a * b / (1.0 - b);
  if (!(D > 0.0)) fail(ErrKind::OutOfDomain, "p11_closed_m1: nonpositive denominator");
  const double e0 = coeffs.eta[0], e1 = coeffs.eta[1];
  return sigma2 * (e0 * e0 + e1 * e1) / D;
}

StationaryCovariance lyap_vec(const MethodCoefficients& coeffs, double lambda, double sigma2) {
  const int n = coeffs.m + 1;
  const Matrix A = spectral::companion(coeffs, lambda);
  if (spectral_radius(A) >= 1.0) fail(ErrKind::Unstable, "lyap_vec: spectral radius >= 1");

  double eta_sq = 0.0;
  for (double e : coeffs.eta) eta_sq += e * e;
  Matrix Q = Matrix::Zero(n, n);
  Q(0, 0) = sigma2 * eta_sq;

  const int n2 = n * n;
  Matrix K = Matrix::Identity(n2, n2);
  // I - A (x) A, with vec in column-major order (Eigen default).
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) K(j * n + i, q * n + p) -= A(i, p) * A(j, q);

  Vector vecQ(n2);
  for (int q = 0; q < n; ++q)
    for (int p = 0; p < n; ++p) vecQ[q * n + p] = Q(p, q);
  const Vector vecP = K.partialPivLu().solve(vecQ);

  Matrix P(n, n);
  for (int q = 0; q < n; ++q)
    for (int p = 0; p < n; ++p) P(p, q) = vecP[q * n + p];
  P = 0.5 * (P + P.transpose()).eval();

  StationaryCovariance out;
  out.lambda = lambda;
  out.P = std::move(P);
  out.p11 = out.P(0, 0);
  return out;
}

double noise_floor(const MethodCoefficients& coeffs, const SpectralMeasure& nu,
                   const NoiseModel& noise) {
  double floor = 0.0;
  for (const auto& atom : nu.atoms) {
    const auto cov = lyap_vec(coeffs, atom.lambda, noise.sigma2_at(atom.lambda));
    floor += 0.5 * atom.weight * atom.lambda * cov.p11;
  }
  return floor;
}

double floor_upper_bound(const MethodCoefficients& coeffs, const SpectralMeasure& nu,
                         const NoiseModel& noise) {
  double eta_sq = 0.0;
  for (double e : coeffs.eta) eta_sq += e * e;
  double bound = 0.0;
  for (const auto& atom : nu.atoms) {
    const double rho = spectral_radius(spectral::companion(coeffs, atom.lambda));
    if (rho >= 1.0) fail(ErrKind::Unstable, "floor_upper_bound: unstable atom");
    bound += 0.5 * atom.weight * atom.lambda * noise.sigma2_at(atom.lambda) * eta_sq /
             (1.0 - rho * rho);
  }
  return bound;
}

double psd_variance(const MethodCoefficients& coeffs, double lambda, double sigma2,
                    int n_omega) {
  if (n_omega < 256) fail(ErrKind::InvalidInput, "psd_variance: n_omega >= 256 required");
  const auto alpha = spectral::recurrence_coeffs(coeffs, lambda);
  if (spectral_radius(spectral::companion(coeffs, lambda)) >= 1.0)
    fail(ErrKind::Unstable, "psd_variance: mode not Schur stable");

  // Trapezoid rule on the periodic integrand == uniform-grid mean.
  double acc = 0.0;
  for (int i = 0; i < n_omega; ++i) {
    const double w = -M_PI + 2.0 * M_PI * static_cast<double>(i) / n_omega;
    std::complex<double> num(0.0, 0.0), den(1.0, 0.0);
    for (int j = 0; j <= coeffs.m; ++j) {
      const std::complex<double> zj = std::polar(1.0, -w * static_cast<double>(j));
      num -= coeffs.eta[static_cast<size_t>(j)] * zj;
      den -= alpha[static_cast<size_t>(j)] * zj * std::polar(1.0, -w);
    }
    acc += std::norm(num / den);
  }
  return sigma2 * acc / n_omega;
}

ExpectationBoundTerms expectation_bound_terms(const MethodCoefficients& coeffs,
                                              const SpectralMeasure& nu,
                                              const NoiseModel& noise, double C_det, long k) {
  if (k < 0) fail(ErrKind::InvalidInput, "expectation_bound: k >= 0 required");
  ExpectationBoundTerms t;

  // Determinantal bulk: (exp sum_atoms w sum_i log|r_i|^2)^k * C_det.
  double log_det_rate = 0.0;
  for (const auto& atom : nu.atoms) {
    for (const auto& r : spectral::modal_roots(coeffs, atom.lambda)) {
      const double rho = std::abs(r);
      if (rho >= 1.0) fail(ErrKind::Unstable, "expectation_bound: unstable root");
      if (rho > 1e-300) log_det_rate += atom.weight * 2.0 * std::log(rho);
    }
  }
  t.determinantal = std::exp(log_det_rate * static_cast<double>(k)) * C_det;

  t.floor = noise_floor(coeffs, nu, noise);

  // Tail: sum_atoms w * lambda/(1 - rho(A)^2) * sigma^2/(1-b) * |sum_j eta_j r_+^j|^2,
  // with r_+ the max-modulus root (exact display for m=1, heuristic for m>=2).
  t.heuristic_tail = coeffs.m >= 2;
  for (const auto& atom : nu.atoms) {
    const auto roots = spectral::modal_roots(coeffs, atom.lambda);
    std::complex<double> r_plus = roots[0];
    for (const auto& r : roots)
      if (std::abs(r) > std::abs(r_plus)) r_plus = r;
    const double rho = std::abs(r_plus);
    double b;
    if (coeffs.m == 1) {
      double a;
      ar2_params(coeffs, atom.lambda, a, b);
    } else {
      b = -(coeffs.gamma[static_cast<size_t>(coeffs.m - 1)] -
            coeffs.eta[static_cast<size_t>(coeffs.m)] * atom.lambda);
    }
    if (std::abs(1.0 - b) < 1e-14) fail(ErrKind::OutOfDomain, "expectation_bound: b == 1");
    std::complex<double> ma(0.0, 0.0);
    std::complex<double> rj(1.0, 0.0);
    for (int j = 0; j <= coeffs.m; ++j) {
      ma += coeffs.eta[static_cast<size_t>(j)] * rj;
      rj *= r_plus;
    }
    t.tail += atom.weight * atom.lambda / (1.0 - rho * rho) *
              noise.sigma2_at(atom.lambda) / (1.0 - b) * std::norm(ma);
  }
  return t;
}

double expectation_bound(const MethodCoefficients& coeffs, const SpectralMeasure& nu,
                         const NoiseModel& noise, double C_det, long k) {
  return expectation_bound_terms(coeffs, nu, noise, C_det, k).value();
}

double stokes_trigger_scale(const MethodCoefficients& coeffs, const SpectralMeasure& nu,
                            const NoiseModel& noise) {
  double acc = 0.0;
  for (const auto& atom : nu.atoms) {
    const auto roots = spectral::modal_roots(coeffs, atom.lambda);
    std::complex<double> r_plus = roots[0];
    for (const auto& r : roots)
      if (std::abs(r) > std::abs(r_plus)) r_plus = r;
    const double rho = std::abs(r_plus);
    if (rho >= 1.0) fail(ErrKind::Unstable, "stokes_trigger_scale: unstable atom");
    std::complex<double> ma(0.0, 0.0), rj(1.0, 0.0);
    for (int j = 0; j <= coeffs.m; ++j) {
      ma += coeffs.eta[static_cast<size_t>(j)] * rj;
      rj *= r_plus;
    }
    acc += atom.weight * noise.sigma2_at(atom.lambda) * std::norm(ma) /
           ((1.0 - rho) * (1.0 - rho));
  }
  return acc;
}

double dominant_frequency(const std::vector<double>& series) {
  const size_t n = series.size();
  if (n < 8) fail(ErrKind::InvalidInput, "dominant_frequency: series too short");
  double best = -1.0;
  size_t best_bin = 1;
  for (size_t bin = 1; bin <= n / 2; ++bin) {
    const double w = 2.0 * M_PI * static_cast<double>(bin) / static_cast<double>(n);
    double re = 0.0, im = 0.0;
    for (size_t t = 0; t < n; ++t) {
      re += series[t] * std::cos(w * static_cast<double>(t));
      im -= series[t] * std::sin(w * static_cast<double>(t));
    }
    const double mag = re * re + im * im;
    if (mag > best) {
      best = mag;
      best_bin = bin;
    }
  }
  return 2.0 * M_PI * static_cast<double>(best_bin) / static_cast<double>(n);
}

}  // namespace flatstep::noise
