#include "flatstep/multistep.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace flatstep::spectral {

MethodCoefficients::MethodCoefficients(int m_, std::vector<double> eta_,
                                       std::vector<double> gamma_)
    : m(m_), eta(std::move(eta_)), gamma(std::move(gamma_)) {
  if (m < 1) fail(ErrKind::InvalidInput, "MethodCoefficients: m >= 1 required");
  if (eta.size() != static_cast<size_t>(m + 1) || gamma.size() != static_cast<size_t>(m))
    fail(ErrKind::InvalidInput, "MethodCoefficients: eta needs m+1 entries, gamma needs m");
  for (double v : eta)
    if (!std::isfinite(v)) fail(ErrKind::InvalidInput, "MethodCoefficients: non-finite eta");
  for (double v : gamma)
    if (!std::isfinite(v)) fail(ErrKind::InvalidInput, "MethodCoefficients: non-finite gamma");
}

std::vector<double> recurrence_coeffs(const MethodCoefficients& c, double lambda) {
  std::vector<double> a(static_cast<size_t>(c.m + 1));
  a[0] = 1.0 - c.eta[0] * lambda + c.gamma[0];
  for (int j = 1; j <= c.m - 1; ++j)
    a[static_cast<size_t>(j)] = c.gamma[static_cast<size_t>(j)] -
                                c.eta[static_cast<size_t>(j)] * lambda;
  a[static_cast<size_t>(c.m)] =
      -(c.gamma[static_cast<size_t>(c.m - 1)] - c.eta[static_cast<size_t>(c.m)] * lambda);
  return a;
}

std::vector<double> char_poly(const MethodCoefficients& c, double lambda) {
  const auto a = recurrence_coeffs(c, lambda);
  std::vector<double> p(a.size() + 1);
  p[0] = 1.0;
  for (size_t j = 0; j < a.size(); ++j) p[j + 1] = -a[j];
  return p;
}

Matrix companion(const MethodCoefficients& c, double lambda) {
  const auto a = recurrence_coeffs(c, lambda);
  const int n = c.m + 1;
  Matrix C = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) C(0, j) = a[static_cast<size_t>(j)];
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  return C;
}

std::vector<std::complex<double>> modal_roots(const MethodCoefficients& c, double lambda) {
  Eigen::EigenSolver<Matrix> es(companion(c, lambda));
  if (es.info() != Eigen::Success) fail(ErrKind::NumericalError, "modal_roots: eigensolver");
  std::vector<std::complex<double>> r(static_cast<size_t>(c.m + 1));
  for (int i = 0; i <= c.m; ++i) r[static_cast<size_t>(i)] = es.eigenvalues()[i];
  return r;
}

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms_, double mu_, double L_)
    : atoms(std::move(atoms_)), mu(mu_), L(L_) {
  if (!(mu > 0.0) || L < mu) fail(ErrKind::InvalidInput, "SpectralMeasure: need 0 < mu <= L");
  for (const auto& a : atoms)
    if (!(a.lambda >= mu && a.lambda <= L) || !(a.weight > 0.0))
      fail(ErrKind::InvalidInput, "SpectralMeasure: atom outside [mu, L] or weight <= 0");
}

ModalMultipliers modal_multipliers_m1(const MethodCoefficients& c, double lambda) {
  if (c.m != 1) fail(ErrKind::Unsupported, "modal_multipliers_m1: m == 1 required");
  const double a = 1.0 - c.eta[0] * lambda + c.gamma[0];
  const double b = c.gamma[0] - c.eta[1] * lambda;
  const double disc = a * a - 4.0 * b;

  ModalMultipliers mm;
  mm.lambda = lambda;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    mm.roots = {std::complex<double>(0.5 * (a + s), 0.0),
                std::complex<double>(0.5 * (a - s), 0.0)};
    mm.oscillatory = false;
  } else {
    const double s = std::sqrt(-disc);
    mm.roots = {std::complex<double>(0.5 * a, 0.5 * s), std::complex<double>(0.5 * a, -0.5 * s)};
    mm.oscillatory = std::abs(0.5 * s) > 1e-12;
    mm.rho = std::sqrt(b);  // product of the conjugate pair is b > 0 here
    mm.theta = std::acos(std::clamp(a / (2.0 * std::sqrt(b)), -1.0, 1.0));
  }
  mm.rho_max = std::max(std::abs(mm.roots[0]), std::abs(mm.roots[1]));
  return mm;
}

bool jury_stable_m1(const MethodCoefficients& c, double lambda) {
  if (c.m != 1) fail(ErrKind::Unsupported, "jury_stable_m1: m == 1 required");
  const double a = 1.0 - c.eta[0] * lambda + c.gamma[0];
  const double b = c.gamma[0] - c.eta[1] * lambda;
  return (1.0 - b > 0.0) && (1.0 + a + b > 0.0) && (1.0 - a + b > 0.0);
}

StabilityReport stability_report(const MethodCoefficients& c, double mu, double L, int grid) {
  if (grid < 2) fail(ErrKind::InvalidInput, "stability_report: grid >= 2 required");
  StabilityReport rep;
  rep.rho_bar = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double lam = mu + (L - mu) * static_cast<double>(i) / (grid - 1);
    double rho = 0.0;
    for (const auto& r : modal_roots(c, lam)) rho = std::max(rho, std::abs(r));
    rep.rho_bar = std::max(rep.rho_bar, rho);
    if (rho >= 1.0) rep.violations.push_back(lam);
  }
  rep.schur_stable = rep.rho_bar < 1.0 - 1e-12;
  return rep;
}

double bulk_exponent(const MethodCoefficients& c, const SpectralMeasure& nu) {
  double A = 0.0;
  for (const auto& atom : nu.atoms) {
    double contrib = 0.0;
    for (const auto& r : modal_roots(c, atom.lambda)) {
      const double rho = std::abs(r);
      if (rho >= 1.0) fail(ErrKind::Unstable, "bulk_exponent: unstable root");
      if (rho <= 1e-300) continue;  // degenerate root, see header
      contrib += std::log(1.0 / rho);
    }
    A += atom.weight * contrib;
  }
  return A;
}

bool in_oscillatory_set_m1(const MethodCoefficients& c, double lambda) {
  if (c.m != 1) fail(ErrKind::Unsupported, "in_oscillatory_set_m1: m == 1 required");
  const double a = 1.0 - c.eta[0] * lambda + c.gamma[0];
  const double b = c.gamma[0] - c.eta[1] * lambda;
  return a * a - 4.0 * b < 0.0;
}

double theta_prime_m1(const MethodCoefficients& c, double lambda) {
  if (c.m != 1) fail(ErrKind::Unsupported, "theta_prime_m1: m == 1 required");
  if (!in_oscillatory_set_m1(c, lambda))
    fail(ErrKind::OutOfDomain, "theta_prime_m1: lambda outside the oscillatory set");
  const double e0 = c.eta[0], e1 = c.eta[1], g1 = c.gamma[0];
  const double a = 1.0 - e0 * lambda + g1;
  const double b = g1 - e1 * lambda;  // > 0 on the oscillatory set
  const double xi = a / (2.0 * std::sqrt(b));
  const double xi_prime =
      (-2.0 * e0 * b + e1 * a) / (4.0 * std::pow(b, 1.5));
  return -xi_prime / std::sqrt(1.0 - xi * xi);
}

namespace {

// Oscillatory set for m=1 is {lambda : q(lambda) < 0} with
// q(lambda) = (1 - eta0*lambda + gamma1)^2 - 4 (gamma1 - eta1*lambda),
// a quadratic (or linear) polynomial in lambda.
std::pair<bool, std::pair<double, double>> osc_interval_m1(const MethodCoefficients& c) {
  const double e0 = c.eta[0], e1 = c.eta[1], g1 = c.gamma[0];
  // q(lambda) = e0^2 lam^2 - (2(1+g1)e0 - 4 e1) lam + (1+g1)^2 - 4 g1
  const double qa = e0 * e0;
  const double qb = -2.0 * (1.0 + g1) * e0 + 4.0 * e1;
  const double qc = (1.0 + g1) * (1.0 + g1) - 4.0 * g1;
  if (qa == 0.0) {
    if (qb == 0.0) return {qc < 0.0, {-1e308, 1e308}};
    const double root = -qc / qb;
    if (qb < 0.0) return {true, {root, 1e308}};
    return {true, {-1e308, root}};
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc <= 0.0) return {false, {0.0, 0.0}};
  const double s = std::sqrt(disc);
  return {true, {(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)}};
}

}  // namespace

std::vector<double> stationary_points_m1(const MethodCoefficients& c, double mu, double L) {
  if (c.m != 1) fail(ErrKind::Unsupported, "stationary_points_m1: m == 1 required");
  const double e0 = c.eta[0], e1 = c.eta[1], g1 = c.gamma[0];
  std::vector<double> pts;

  const auto [has_osc, iv] = osc_interval_m1(c);
  if (!has_osc) return pts;
  const double lo = std::max(iv.first, mu);
  const double hi = std::min(iv.second, L);
  if (!(lo < hi)) return pts;

  pts.push_back(lo);
  pts.push_back(hi);
  if (e0 * e1 != 0.0) {
    // Root of the stationary equation -2 eta0 (gamma1 - eta1 lam)
    // + eta1 (1 - eta0 lam + gamma1) = 0, which is where theta' vanishes.
    const double lam_star = (2.0 * e0 * g1 - e1 * (1.0 + g1)) / (e0 * e1);
    if (lam_star > lo && lam_star < hi) pts.push_back(lam_star);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

std::pair<double, double> airy_amplitude(const MethodCoefficients& c, double lambda_star) {
  const ModalMultipliers mm = modal_multipliers_m1(c, lambda_star);
  if (!mm.oscillatory)
    fail(ErrKind::OutOfDomain, "airy_amplitude: lambda_star not in the oscillatory set");
  if (!(mm.rho < 1.0)) fail(ErrKind::Unstable, "airy_amplitude: rho(lambda_star) >= 1");

  // theta'' by central differences of theta', one Richardson pass.
  const double e = 1e-5;
  auto d2 = [&](double step) {
    return (theta_prime_m1(c, lambda_star + step) - theta_prime_m1(c, lambda_star - step)) /
           (2.0 * step);
  };
  const double coarse = d2(e), fine = d2(0.5 * e);
  const double theta2 = (4.0 * fine - coarse) / 3.0;
  if (std::abs(theta2) < 1e-10)
    fail(ErrKind::DegenerateStationaryPoint, "airy_amplitude: |theta''| < 1e-10");

  const double amp = (1.0 / std::sqrt(M_PI)) * std::sqrt(mm.rho / (1.0 - mm.rho * mm.rho)) /
                     std::sqrt(std::abs(theta2));
  return {amp, M_PI / 4.0};
}

std::pair<double, double> stokes_jump_m1(const MethodCoefficients& c, double lambda_wall,
                                         std::complex<double> r_wall) {
  if (c.m != 1) fail(ErrKind::Unsupported, "stokes_jump_m1: m == 1 required");
  const double a = 1.0 - c.eta[0] * lambda_wall + c.gamma[0];
  const double b = c.gamma[0] - c.eta[1] * lambda_wall;
  const double disc = a * a - 4.0 * b;
  const bool on_circle = std::abs(std::abs(r_wall) - 1.0) <= 1e-8;
  const bool double_root = std::abs(disc) <= 1e-8;
  if (!on_circle && !double_root)
    fail(ErrKind::NotAWall, "stokes_jump_m1: point is not on a Stokes wall");

  const std::complex<double> denom = 2.0 * r_wall - a;
  if (std::abs(denom) <= 1e-10)
    fail(ErrKind::PoleAtWall, "stokes_jump_m1: jump formula singular at a double root");
  const std::complex<double> ratio = (c.eta[0] * r_wall + c.eta[1]) / denom;
  const double arg = std::arg(ratio);
  return {arg / (2.0 * M_PI), arg};
}

double nonasymptotic_bound(const MethodCoefficients& c, const SpectralMeasure& nu,
                           double C_init, int k, double stokes_product) {
  if (k < 0) fail(ErrKind::InvalidInput, "nonasymptotic_bound: k >= 0 required");
  double resolved = 0.0;
  for (const auto& atom : nu.atoms) {
    double rho = 0.0;
    for (const auto& r : modal_roots(c, atom.lambda)) rho = std::max(rho, std::abs(r));
    resolved += atom.weight * std::pow(rho * rho, k);
  }
  return resolved * C_init * stokes_product;
}

ChebyshevFilter::ChebyshevFilter(int N_, double mu_, double L_) : N(N_), mu(mu_), L(L_) {
  if (N < 1 || !(mu > 0.0) || !(L > mu))
    fail(ErrKind::InvalidInput, "ChebyshevFilter: need N >= 1 and 0 < mu < L");
}

namespace {

double cheb_T(int n, double x) {
  if (std::abs(x) <= 1.0) return std::cos(n * std::acos(x));
  // |x| > 1: cosh form, sign handled for negative x.
  const double t = std::cosh(n * std::acosh(std::abs(x)));
  return (x < 0.0 && (n % 2 == 1)) ? -t : t;
}

}  // namespace

double ChebyshevFilter::tn_at_reference() const {
  return cheb_T(N, (L + mu) / (L - mu));
}

double ChebyshevFilter::evaluate(double lambda) const {
  const double x = (L + mu - 2.0 * lambda) / (L - mu);
  return cheb_T(N, x) / tn_at_reference();
}

double ChebyshevFilter::sup_residual(int grid) const {
  double sup = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double lam = mu + (L - mu) * static_cast<double>(i) / (grid - 1);
    sup = std::max(sup, std::abs(evaluate(lam)));
  }
  return sup;
}

double ChebyshevFilter::sup_exp_gap(double h, int grid) const {
  double sup = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double lam = mu + (L - mu) * static_cast<double>(i) / (grid - 1);
    sup = std::max(sup, std::abs(evaluate(lam) - std::exp(-static_cast<double>(N) * h * lam)));
  }
  return sup;
}

std::vector<double> ChebyshevFilter::monomial_coeffs() const {
  if (N > 64) fail(ErrKind::Unsupported, "monomial_coeffs: unstable beyond N = 64");
  // x(lambda) = c0 + c1 lambda; run the T recurrence on coefficient vectors.
  const double c0 = (L + mu) / (L - mu);
  const double c1 = -2.0 / (L - mu);
  std::vector<double> tm1 = {1.0};       // T_0
  std::vector<double> t = {c0, c1};      // T_1(x(lambda))
  if (N == 0) return tm1;
  for (int n = 2; n <= N; ++n) {
    std::vector<double> next(static_cast<size_t>(n + 1), 0.0);
    for (size_t j = 0; j < t.size(); ++j) {
      next[j] += 2.0 * c0 * t[j];
      next[j + 1] += 2.0 * c1 * t[j];
    }
    for (size_t j = 0; j < tm1.size(); ++j) next[j] -= tm1[j];
    tm1 = std::move(t);
    t = std::move(next);
  }
  const double scale = 1.0 / tn_at_reference();
  for (double& v : t) v *= scale;
  return t;
}

}  // namespace flatstep::spectral
