#include "flatstep/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace flatstep {

Matrix expm(const Matrix& a) {
  require_square(a, "expm");
  require_finite(a, "expm");
  return a.exp();
}

Matrix logm(const Matrix& a) {
  require_square(a, "logm");
  require_finite(a, "logm");
  // Principal branch needs the spectrum off the closed negative real axis.
  Eigen::EigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) fail(ErrKind::NumericalError, "logm: eigensolver failed");
  const double scale = a.norm() + 1e-300;
  for (int i = 0; i < a.rows(); ++i) {
    const auto ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) <= 1e-14 * scale && ev.real() <= 0.0)
      fail(ErrKind::BranchError, "logm: eigenvalue on the closed negative real axis");
  }
  return a.log();
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  require_square(a, "commutator");
  require_same_dim(a, b, "commutator");
  require_finite(a, "commutator");
  require_finite(b, "commutator");
  return a * b - b * a;
}

double symmetry_defect(const Matrix& a) {
  const double na = a.norm();
  if (na == 0.0) return 0.0;
  return (a - a.transpose()).norm() / na;
}

bool is_spd(const Matrix& a) {
  if (a.rows() != a.cols() || !all_finite(a)) return false;
  if (symmetry_defect(a) > 1e-10) return false;
  Eigen::LLT<Matrix> llt(Matrix(0.5 * (a + a.transpose())));
  return llt.info() == Eigen::Success;
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& err,
                    double floor) {
  if (h.size() != err.size() || h.size() < 2)
    fail(ErrKind::InvalidInput, "loglog_slope: need >=2 matched samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < h.size(); ++i) {
    if (err[i] <= floor || h[i] <= 0) continue;
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n < 2) fail(ErrKind::NumericalError, "loglog_slope: too few usable samples");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double SplitMix64::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * M_PI * u2;
  spare_ = r * std::sin(th);
  have_spare_ = true;
  return r * std::cos(th);
}

Matrix SplitMix64::random_matrix(int n, double scale) {
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * normal();
  return a;
}

Matrix SplitMix64::random_symmetric(int n, double scale) {
  Matrix a = random_matrix(n, scale);
  return 0.5 * (a + a.transpose());
}

Matrix SplitMix64::random_spd(int n, double lo, double hi) {
  // Orthogonal basis from QR of a Gaussian matrix, spectrum uniform in [lo,hi].
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n));
  Matrix q = qr.householderQ();
  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = uniform(lo, hi);
  return q * d.asDiagonal() * q.transpose();
}

Vector SplitMix64::random_vector(int n, double scale) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * normal();
  return v;
}

Vector SplitMix64::random_unit(int n) {
  Vector v = random_vector(n);
  double nv = v.norm();
  while (nv < 1e-12) {
    v = random_vector(n);
    nv = v.norm();
  }
  return v / nv;
}

}  // namespace flatstep
