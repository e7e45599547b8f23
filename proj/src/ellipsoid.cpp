#include "flatstep/ellipsoid.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace flatstep::ellipsoid {

namespace {

double chol_logdet(const Matrix& P) {
  Eigen::LLT<Matrix> llt(P);
  if (llt.info() != Eigen::Success) fail(ErrKind::NotSPD, "ellipsoid: shape matrix not SPD");
  double s = 0.0;
  const Matrix L = llt.matrixL();
  for (int i = 0; i < P.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

}  // namespace

EllipsoidState::EllipsoidState(Vector x_, Matrix P_) : x(std::move(x_)), P(std::move(P_)) {
  require_square(P, "EllipsoidState");
  if (x.size() != P.rows()) fail(ErrKind::InvalidInput, "EllipsoidState: size mismatch");
  logdetP = chol_logdet(P);
}

double TauLedger::bulk_sum() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.delta_log_tau_bulk;
  return s;
}

double TauLedger::jump_sum() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.switch_jump;
  return s;
}

EllipsoidState ellipsoid_step(const EllipsoidState& state, const Vector& g) {
  const int n = static_cast<int>(state.x.size());
  if (n < 2) fail(ErrKind::InvalidInput, "ellipsoid_step: n >= 2 required");
  if (g.size() != n || g.norm() == 0.0)
    fail(ErrKind::InvalidInput, "ellipsoid_step: nonzero g of matching size required");

  const double gPg = g.dot(state.P * g);
  if (!(gPg > 0.0)) fail(ErrKind::NumericalError, "ellipsoid_step: g^T P g <= 0");
  const Vector gt = g / std::sqrt(gPg);
  const Vector Pg = state.P * gt;

  const double nn = static_cast<double>(n);
  Matrix Pn = (nn * nn / (nn * nn - 1.0)) *
              (state.P - (2.0 / (nn + 1.0)) * (Pg * Pg.transpose()));
  Pn = 0.5 * (Pn + Pn.transpose()).eval();

  EllipsoidState out(state.x - Pg / (nn + 1.0), std::move(Pn));
  out.k = state.k + 1;
  return out;
}

double bulk_shrink(int n) {
  if (n < 2) fail(ErrKind::InvalidInput, "bulk_shrink: n >= 2 required");
  const double nn = static_cast<double>(n);
  return 0.5 * nn * std::log(nn * nn / (nn * nn - 1.0)) +
         0.5 * std::log(1.0 - 2.0 / (nn + 1.0));
}

long iteration_bound(int n, double R, double r, double stokes_sum) {
  if (n < 2 || !(R > r) || !(r > 0.0))
    fail(ErrKind::InvalidInput, "iteration_bound: need n >= 2 and R > r > 0");
  const double nn = static_cast<double>(n);
  const double denom =
      std::abs(nn * std::log(nn * nn / (nn * nn - 1.0)) + std::log(1.0 - 2.0 / (nn + 1.0)));
  const double num = 2.0 * nn * std::log(R / r) - stokes_sum;
  return static_cast<long>(std::ceil(num / denom));
}

double switch_jump(const Vector& u1, const Vector& u2, double a, double b, double alpha_n) {
  if (std::abs(u1.norm() - 1.0) > 1e-8 || std::abs(u2.norm() - 1.0) > 1e-8)
    fail(ErrKind::InvalidInput, "switch_jump: u1, u2 must be unit vectors");
  if (a == b) fail(ErrKind::PoleAtWall, "switch_jump: a == b");
  const double inner = u2.dot(u1);
  if (std::abs(inner) < 1e-14)
    fail(ErrKind::DegenerateSwitch, "switch_jump: orthogonal cuts, branch undefined");
  const double ratio = alpha_n * inner / (a - b);
  // Principal argument of a real number: 0 for positive, pi for negative.
  return (ratio > 0.0) ? 0.0 : 0.5;
}

FeasibilityResult run_feasibility(const Oracle& oracle, const Vector& x0, double R, double r,
                                  long max_iter) {
  const int n = static_cast<int>(x0.size());
  if (n < 2) fail(ErrKind::InvalidInput, "run_feasibility: n >= 2 required");
  if (!(R > r) || !(r > 0.0)) fail(ErrKind::InvalidInput, "run_feasibility: need R > r > 0");

  FeasibilityResult res{false, EllipsoidState(x0, R * R * Matrix::Identity(n, n)), {}};
  const double stop_level = -static_cast<double>(n) * std::log(R / r);
  const double per_step = bulk_shrink(n);
  const double alpha_n = 2.0 / (n + 1.0);

  std::optional<Vector> prev_cut;
  std::optional<int> prev_face;
  std::optional<Vector> prev_center;
  double bulk_acc = 0.0;

  for (long it = 0; it < max_iter; ++it) {
    const auto sep = oracle(res.state.x);
    if (sep.feasible) {
      res.found = true;
      return res;
    }
    if (!sep.g || sep.g->norm() == 0.0)
      fail(ErrKind::OracleContractViolation, "run_feasibility: infeasible with zero cut");

    double jump = 0.0;
    const Vector u2 = *sep.g / sep.g->norm();
    if (prev_cut && prev_face && sep.face_id && *prev_face != *sep.face_id) {
      const Vector& u1 = *prev_cut;
      const double angle = std::acos(std::clamp(u1.dot(u2), -1.0, 1.0));
      if (angle > 1e-6) {
        // Pole positions: projections of the two cut points onto the switch
        // direction (the normalized cut-direction change).
        const Vector d = (u2 - u1).normalized();
        const double a = prev_center->dot(d);
        const double b = res.state.x.dot(d);
        if (a != b && std::abs(u2.dot(u1)) >= 1e-14)
          jump = switch_jump(u1, u2, a, b, alpha_n);
      }
    }
    prev_cut = u2;
    prev_face = sep.face_id;
    prev_center = res.state.x;

    res.state = ellipsoid_step(res.state, *sep.g);
    bulk_acc += per_step;
    res.ledger.entries.push_back({res.state.k, per_step, jump});
    if (bulk_acc <= stop_level) return res;  // volume certificate reached
  }
  return res;
}

}  // namespace flatstep::ellipsoid
