#include "flatstep/protocols.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

namespace flatstep::protocols {

Matrix gauge_reference_op(const opcore::OperatorPair& pair, double h, const Matrix& Z) {
  const Matrix S = pair.H + pair.E;
  const Matrix W = expm(h * Z);
  const Matrix Winv = expm(-h * Z);
  const Matrix id = Matrix::Identity(S.rows(), S.cols());
  return W * (id - h * S) * Winv;
}

CalibrationSlopes calibration_slopes(const opcore::OperatorPair& pair, double h_lo,
                                     double h_hi, int n_h, double rho) {
  const int n = pair.dim();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix S = pair.H + pair.E;
  const Matrix C = 0.5 * commutator(pair.H, pair.E);
  const Matrix Z = calib::gauge_for_pair(pair).Z;

  CalibrationSlopes out;
  for (int i = 0; i < n_h; ++i) {
    const double t = (n_h == 1) ? 0.0 : static_cast<double>(i) / (n_h - 1);
    const double h = h_lo * std::pow(h_hi / h_lo, t);
    out.h.push_back(h);

    const Matrix ref = gauge_reference_op(pair, h, Z);

    // One-step operators. Variant A applies the truncated gauge series to
    // the Euler core; B is the additive commutator correction; the filtered
    // operator keeps its printed h-scaling and safeguard.
    const Matrix w3 = id + h * Z + 0.5 * h * h * Z * Z;
    const Matrix w3inv = id - h * Z + 0.5 * h * h * Z * Z;
    const Matrix op_a = w3 * (id - h * S) * w3inv;
    const Matrix op_b = id - h * S - h * h * C;
    const Matrix op_plain = (id - h * pair.E) * (id - h * pair.H);

    // Filtered operator: x - h (S g - s C g) with the safeguard scale taken
    // at a reference direction (the leading right singular direction of C).
    Eigen::JacobiSVD<Matrix> svd(2.0 * C, Eigen::ComputeFullV);
    const Vector g = svd.matrixV().col(0);
    const Vector comm_g = 2.0 * C * g;
    double s = 1.0;
    if (comm_g.norm() > 0.0) s = std::min(1.0, rho * (S * g).norm() / comm_g.norm());
    const Matrix op_f = id - h * (S - s * C);

    out.err_plain.push_back((op_plain - ref).norm());
    out.err_a.push_back((op_a - op_b).norm());
    out.err_b.push_back((op_b - ref).norm());
    out.err_filtered.push_back((op_f - ref).norm());
  }
  out.slope_plain = loglog_slope(out.h, out.err_plain);
  out.slope_a = loglog_slope(out.h, out.err_a);
  out.slope_b = loglog_slope(out.h, out.err_b);
  out.slope_filtered = loglog_slope(out.h, out.err_filtered);
  return out;
}

opcore::OperatorPair random_pair(SplitMix64& rng, int dim, double scale) {
  Matrix H = rng.random_symmetric(dim, scale);
  Matrix E = rng.random_symmetric(dim, scale);
  // Exact symmetrization so the pair constructor's tolerance is met.
  H = 0.5 * (H + H.transpose()).eval();
  E = 0.5 * (E + E.transpose()).eval();
  return opcore::OperatorPair(H, E);
}

double modal_envelope(const spectral::MethodCoefficients& coeffs, double lambda,
                      const std::vector<double>& y_init) {
  const int n = coeffs.m + 1;
  if (y_init.size() != static_cast<size_t>(n))
    fail(ErrKind::InvalidInput, "modal_envelope: y_init needs m+1 entries");
  const auto roots = spectral::modal_roots(coeffs, lambda);

  // y_{-j} = sum_i c_i r_i^{-j}: Vandermonde system in the roots; y_init is
  // newest first (y_0, y_-1, ..., y_-m).
  Eigen::MatrixXcd V(n, n);
  Eigen::VectorXcd rhs(n);
  for (int row = 0; row < n; ++row) {
    rhs[row] = y_init[static_cast<size_t>(row)];
    for (int i = 0; i < n; ++i) {
      const std::complex<double> r = roots[static_cast<size_t>(i)];
      if (std::abs(r) < 1e-12) {
        // Degenerate root: contributes only at a single lag; keep the column
        // well defined by treating r^0 = 1 and higher negative powers as 0.
        V(row, i) = (row == 0) ? 1.0 : 0.0;
      } else {
        V(row, i) = std::pow(r, -static_cast<double>(row));
      }
    }
  }
  const Eigen::VectorXcd c = V.fullPivLu().solve(rhs);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::abs(c[i]);
  return s * s;
}

double quadratic_envelope(const spectral::MethodCoefficients& coeffs,
                          const spectral::SpectralMeasure& nu,
                          const std::vector<double>& y_init) {
  double acc = 0.0;
  for (const auto& atom : nu.atoms)
    acc += atom.weight * 0.5 * atom.lambda * modal_envelope(coeffs, atom.lambda, y_init);
  return acc;
}

std::vector<double> quadratic_objective_trace(const spectral::MethodCoefficients& coeffs,
                                              const spectral::SpectralMeasure& nu,
                                              const std::vector<double>& y_init, long k) {
  std::vector<double> f(static_cast<size_t>(k), 0.0);
  noise::NoiseModel quiet;
  for (const auto& atom : nu.atoms) {
    quiet.sigma2[atom.lambda] = 0.0;
    const auto y = noise::simulate_modal(coeffs, atom.lambda, quiet, y_init, k);
    for (long t = 0; t < k; ++t)
      f[static_cast<size_t>(t)] += atom.weight * 0.5 * atom.lambda *
                                   y[static_cast<size_t>(t)] * y[static_cast<size_t>(t)];
  }
  return f;
}

ellipsoid::Oracle BallPolytope::oracle() const {
  return [self = *this](const Vector& x) {
    ellipsoid::SeparationOracleResult res;
    if (x.norm() > self.R) {
      res.feasible = false;
      res.g = x.normalized();
      res.face_id = -1;
      return res;
    }
    for (size_t i = 0; i < self.normals.size(); ++i) {
      if (self.normals[i].dot(x) > self.offsets[i]) {
        res.feasible = false;
        res.g = self.normals[i];
        res.face_id = static_cast<int>(i);
        return res;
      }
    }
    res.feasible = true;
    return res;
  };
}

bool BallPolytope::contains(const Vector& x) const {
  if (x.norm() > R) return false;
  for (size_t i = 0; i < normals.size(); ++i)
    if (normals[i].dot(x) > offsets[i]) return false;
  return true;
}

BallPolytope random_ball_polytope(SplitMix64& rng, int n, double R, double r, int n_faces) {
  BallPolytope poly;
  poly.R = R;
  poly.r = r;
  // Center placed so that ball(center, r) stays inside ball(0, R).
  poly.center = rng.random_unit(n) * rng.uniform(0.0, std::max(0.0, R - 2.0 * r));
  for (int i = 0; i < n_faces; ++i) {
    const Vector a = rng.random_unit(n);
    // Face at distance >= r from the promised center keeps ball(center, r)
    // inside the halfspace a^T x <= b.
    const double b = a.dot(poly.center) + r * (1.0 + rng.uniform(0.0, 2.0));
    poly.normals.push_back(a);
    poly.offsets.push_back(b);
  }
  return poly;
}

int equioscillation_count(const spectral::ChebyshevFilter& f, int grid, double tol) {
  // Residual extrema cluster quadratically in lambda near the band edges, so
  // the scan runs in the angle variable phi = acos(x(lambda)), where they are
  // uniformly spaced. Brackets refined by ternary search before counting
  // sign alternations among extrema matching the sup within tol.
  const int g = std::max(grid, 8 * f.N + 9);
  auto lambda_of_phi = [&](double phi) {
    const double x = std::cos(phi);
    return 0.5 * (f.L + f.mu - (f.L - f.mu) * x);
  };
  auto value_at = [&](double phi) { return f.evaluate(lambda_of_phi(phi)); };

  std::vector<double> phi(static_cast<size_t>(g)), val(static_cast<size_t>(g));
  for (int i = 0; i < g; ++i) {
    phi[static_cast<size_t>(i)] = M_PI * static_cast<double>(i) / (g - 1);
    val[static_cast<size_t>(i)] = value_at(phi[static_cast<size_t>(i)]);
  }

  auto refine = [&](double lo, double hi) {
    for (int it = 0; it < 120 && hi - lo > 1e-14; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (std::abs(value_at(m1)) < std::abs(value_at(m2)))
        lo = m1;
      else
        hi = m2;
    }
    return 0.5 * (lo + hi);
  };

  std::vector<double> extrema;
  extrema.push_back(val[0]);
  for (int i = 1; i + 1 < g; ++i) {
    const double a = std::abs(val[static_cast<size_t>(i - 1)]);
    const double b = std::abs(val[static_cast<size_t>(i)]);
    const double c = std::abs(val[static_cast<size_t>(i + 1)]);
    if (b >= a && b >= c && (b > a || b > c))
      extrema.push_back(value_at(refine(phi[static_cast<size_t>(i - 1)],
                                        phi[static_cast<size_t>(i + 1)])));
  }
  extrema.push_back(val[static_cast<size_t>(g - 1)]);

  double sup = 0.0;
  for (double v : extrema) sup = std::max(sup, std::abs(v));

  int count = 0;
  double last_sign = 0.0;
  for (double v : extrema) {
    if (std::abs(std::abs(v) - sup) > tol * std::max(1.0, sup)) continue;
    const double sign = (v > 0.0) ? 1.0 : -1.0;
    if (sign != last_sign) {
      ++count;
      last_sign = sign;
    }
  }
  return count;
}

}  // namespace flatstep::protocols
