#pragma once

#include "flatstep/linalg.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace flatstep::ellipsoid {

struct EllipsoidState {
  Vector x;        // center
  Matrix P;        // SPD shape matrix
  double logdetP;  // cached; equals 2 * sum log diag of the Cholesky factor
  long k = 0;      // iteration counter

  EllipsoidState(Vector x_, Matrix P_);
};

struct SeparationOracleResult {
  bool feasible = false;
  std::optional<Vector> g;        // nonzero cut when infeasible
  std::optional<int> face_id;     // optional active-face tag (switch detection)
};

using Oracle = std::function<SeparationOracleResult(const Vector&)>;

struct TauLedger {
  struct Entry {
    long k;
    double delta_log_tau_bulk;
    double switch_jump;
  };
  std::vector<Entry> entries;
  double bulk_sum() const;
  double jump_sum() const;
};

/// Central-cut update:
///   gt = g / sqrt(g^T P g),  x+ = x - P gt/(n+1),
///   P+ = n^2/(n^2-1) (P - 2/(n+1) P gt gt^T P).
/// The log-det decrement is the n-only constant
///   n log(n^2/(n^2-1)) + log(1 - 2/(n+1)).
EllipsoidState ellipsoid_step(const EllipsoidState& state, const Vector& g);

/// Exact per-step tau shrink (half the log-det decrement):
///   (n/2) log(n^2/(n^2-1)) + (1/2) log(1 - 2/(n+1))  <  -1/(2n+2).
double bulk_shrink(int n);

/// ceil((2 n log(R/r) - stokes_sum) / |n log(n^2/(n^2-1)) + log(1 - 2/(n+1))|).
long iteration_bound(int n, double R, double r, double stokes_sum = 0.0);

/// Stokes jump at a switch of active cuts:
///   (1/2pi) arg(alpha_n <u2,u1> / (a-b)), principal branch.
double switch_jump(const Vector& u1, const Vector& u2, double a, double b, double alpha_n);

struct FeasibilityResult {
  bool found = false;
  EllipsoidState state;
  TauLedger ledger;
};

/// Run the central-cut method from the ball E(x0, R^2 I) until the oracle
/// accepts, the tau stopping criterion  sum bulk shrinks <= -n log(R/r)
/// fires, or max_iter is hit. Switch jumps are recorded in the ledger as
/// diagnostics; they never alter the iterate sequence.
FeasibilityResult run_feasibility(const Oracle& oracle, const Vector& x0, double R, double r,
                                  long max_iter);

}  // namespace flatstep::ellipsoid
