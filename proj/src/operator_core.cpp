#include "flatstep/operator_core.hpp"

#include <Eigen/LU>

#include <cmath>

namespace flatstep::opcore {

OperatorPair::OperatorPair(Matrix h, Matrix e) : H(std::move(h)), E(std::move(e)) {
  require_square(H, "OperatorPair");
  require_same_dim(H, E, "OperatorPair");
  require_finite(H, "OperatorPair");
  require_finite(E, "OperatorPair");
  if (symmetry_defect(H) > 1e-12)
    fail(ErrKind::InvalidInput, "OperatorPair: H not symmetric to 1e-12 relative");
  if (symmetry_defect(E) > 1e-12)
    fail(ErrKind::InvalidInput, "OperatorPair: E not symmetric to 1e-12 relative");
}

JetSeries::JetSeries(std::vector<Matrix> c) : coeffs(std::move(c)) {
  for (const auto& m : coeffs) {
    require_square(m, "JetSeries");
    require_finite(m, "JetSeries");
    if (m.rows() != coeffs[0].rows())
      fail(ErrKind::InvalidInput, "JetSeries: coefficients of unequal dimension");
  }
}

Matrix JetSeries::coeff(int k) const {
  if (k < 1) fail(ErrKind::InvalidInput, "JetSeries::coeff: k >= 1 required");
  if (k > order()) return Matrix::Zero(dim(), dim());
  return coeffs[static_cast<size_t>(k - 1)];
}

Matrix JetSeries::eval(double h) const {
  Matrix acc = Matrix::Zero(dim(), dim());
  double hk = 1.0;
  for (const auto& c : coeffs) {
    hk *= h;
    acc += hk * c;
  }
  return acc;
}

double JetSeries::norm2() const {
  double s = 0.0;
  for (const auto& c : coeffs) s += c.squaredNorm();
  return s;
}

JetSeries jet_add(const JetSeries& x, const JetSeries& y) {
  const int n = std::max(x.order(), y.order());
  const int d = x.order() ? x.dim() : y.dim();
  std::vector<Matrix> c;
  c.reserve(static_cast<size_t>(n));
  for (int k = 1; k <= n; ++k) {
    Matrix a = (k <= x.order()) ? x.coeff(k) : Matrix::Zero(d, d);
    if (k <= y.order()) a += y.coeff(k);
    c.push_back(std::move(a));
  }
  return JetSeries(std::move(c));
}

JetSeries jet_scale(const JetSeries& x, double s) {
  std::vector<Matrix> c;
  c.reserve(x.coeffs.size());
  for (const auto& m : x.coeffs) c.push_back(s * m);
  return JetSeries(std::move(c));
}

JetSeries jet_commutator(const JetSeries& x, const JetSeries& y, int max_order) {
  const int d = x.order() ? x.dim() : y.dim();
  std::vector<Matrix> c(static_cast<size_t>(max_order), Matrix::Zero(d, d));
  for (int a = 1; a <= x.order(); ++a)
    for (int b = 1; b <= y.order(); ++b) {
      if (a + b > max_order) continue;
      c[static_cast<size_t>(a + b - 1)] += commutator(x.coeff(a), y.coeff(b));
    }
  return JetSeries(std::move(c));
}

JetSeries resolvent_log_jet(const Matrix& a, int order) {
  require_square(a, "resolvent_log_jet");
  std::vector<Matrix> c;
  Matrix p = Matrix::Identity(a.rows(), a.cols());
  for (int k = 1; k <= order; ++k) {
    p = p * a;  // a^k
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    c.push_back(sign / static_cast<double>(k) * p);
  }
  return JetSeries(std::move(c));
}

HolonomyReport holonomy(const OperatorPair& pair, double h) {
  if (!(h > 0.0)) fail(ErrKind::InvalidInput, "holonomy: h must be positive");
  const int n = pair.dim();
  const Matrix id = Matrix::Identity(n, n);

  auto resolvent = [&](const Matrix& gen, const char* name) {
    Eigen::FullPivLU<Matrix> lu(id + h * gen);
    if (!lu.isInvertible())
      fail(ErrKind::StepTooLarge, std::string("holonomy: I + h*") + name + " singular");
    return lu.inverse();
  };
  const Matrix r = resolvent(pair.H, "H");
  const Matrix d = resolvent(pair.E, "E");

  const Matrix hol = d * r * (id + h * pair.E) * (id + h * pair.H);

  HolonomyReport rep;
  rep.h = h;
  rep.log_hol = logm(hol);
  rep.leading_commutator = h * h * commutator(-pair.E, -pair.H);
  rep.energy = rep.log_hol.squaredNorm();
  return rep;
}

JetSeries bch_compose(const JetSeries& x, const JetSeries& y, int order) {
  if (order > 4) fail(ErrKind::Unsupported, "bch_compose: order > 4 not supported");
  if (order < 1) fail(ErrKind::InvalidInput, "bch_compose: order >= 1 required");
  const int d = x.order() ? x.dim() : y.dim();
  if (d == 0) fail(ErrKind::InvalidInput, "bch_compose: empty series");
  auto X = [&](int k) { return x.coeff(k); };
  auto Y = [&](int k) { return y.coeff(k); };
  auto br = [](const Matrix& a, const Matrix& b) { return commutator(a, b); };

  std::vector<Matrix> z(static_cast<size_t>(order), Matrix::Zero(d, d));
  z[0] = X(1) + Y(1);
  if (order >= 2) z[1] = X(2) + Y(2) + 0.5 * br(X(1), Y(1));
  if (order >= 3) {
    z[2] = X(3) + Y(3) + 0.5 * (br(X(1), Y(2)) + br(X(2), Y(1))) +
           (1.0 / 12.0) * (br(X(1), br(X(1), Y(1))) + br(Y(1), br(Y(1), X(1))));
  }
  if (order >= 4) {
    Matrix cubic = Matrix::Zero(d, d);
    // [X,[X,Y]] and [Y,[Y,X]] terms at total degree 4.
    cubic += br(X(1), br(X(1), Y(2))) + br(X(1), br(X(2), Y(1))) + br(X(2), br(X(1), Y(1)));
    cubic += br(Y(1), br(Y(1), X(2))) + br(Y(1), br(Y(2), X(1))) + br(Y(2), br(Y(1), X(1)));
    z[3] = X(4) + Y(4) + 0.5 * (br(X(1), Y(3)) + br(X(2), Y(2)) + br(X(3), Y(1))) +
           (1.0 / 12.0) * cubic - (1.0 / 24.0) * br(Y(1), br(X(1), br(X(1), Y(1))));
  }
  return JetSeries(std::move(z));
}

int jet_flatness_order(const JetSeries& x, const JetSeries& y, int alpha, double tol) {
  if (alpha < 1) fail(ErrKind::InvalidInput, "jet_flatness_order: alpha >= 1 required");
  int m = 1;
  while (m < alpha) {
    // Candidate m+1 requires all brackets with k+l <= m+1 below tol.
    bool ok = true;
    for (int k = 1; k <= x.order() && ok; ++k)
      for (int l = 1; l <= y.order(); ++l) {
        if (k + l > m + 1) continue;
        if (commutator(x.coeff(k), y.coeff(l)).norm() > tol) {
          ok = false;
          break;
        }
      }
    if (!ok) break;
    ++m;
  }
  return m;
}

double curvature_energy(const std::vector<HolonomyReport>& reports) {
  double s = 0.0;
  for (const auto& r : reports) s += r.energy;
  return s;
}

std::pair<double, double> axis_energies(const std::vector<JetSeries>& jets_t,
                                        const std::vector<JetSeries>& jets_s) {
  if (jets_t.size() != jets_s.size())
    fail(ErrKind::InvalidInput, "axis_energies: list length mismatch");
  if (jets_t.size() < 2)
    fail(ErrKind::InvalidInput, "axis_energies: need at least 2 steps");
  double st = 0.0, ss = 0.0;
  for (size_t k = 0; k + 1 < jets_t.size(); ++k) {
    const JetSeries& omega = jets_t[k];
    const JetSeries& psi = jets_s[k];
    const JetSeries dpsi = jet_add(jets_s[k + 1], jet_scale(psi, -1.0));
    const JetSeries domega = jet_add(jets_t[k + 1], jet_scale(omega, -1.0));
    const int mo = std::max(dpsi.order() + omega.order(), psi.order() + domega.order());
    st += jet_scale(jet_commutator(dpsi, omega, mo), 0.5).norm2();
    ss += jet_scale(jet_commutator(psi, domega, mo), 0.5).norm2();
  }
  return {st, ss};
}

}  // namespace flatstep::opcore
