#include "flatstep/logdet.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace flatstep::logdet {

double logdet_chol(const Matrix& A) {
  require_square(A, "logdet_chol");
  require_finite(A, "logdet_chol");
  Eigen::LLT<Matrix> llt(Matrix(0.5 * (A + A.transpose())));
  if (llt.info() != Eigen::Success) fail(ErrKind::NotSPD, "logdet_chol: Cholesky failed");
  double s = 0.0;
  const Matrix L = llt.matrixL();
  for (int i = 0; i < A.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

namespace {

Vector draw_probe(SplitMix64& rng, int dim, ProbeKind kind) {
  Vector z(dim);
  if (kind == ProbeKind::rademacher)
    for (int i = 0; i < dim; ++i) z[i] = rng.rademacher();
  else
    for (int i = 0; i < dim; ++i) z[i] = rng.normal();
  return z;
}

struct MeanStderr {
  double mean = 0.0, se = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  if (xs.size() > 1) {
    double var = 0.0;
    for (double x : xs) var += (x - out.mean) * (x - out.mean);
    var /= (n - 1.0);
    out.se = std::sqrt(var / n);
  }
  return out;
}

}  // namespace

Estimate hutchinson_trace(const ApplyFn& applyM, int dim, const ProbeConfig& cfg) {
  if (cfg.n_probes < 1 || dim < 1)
    fail(ErrKind::InvalidInput, "hutchinson_trace: n_probes >= 1 and dim >= 1 required");
  std::vector<double> samples;
  samples.reserve(static_cast<size_t>(cfg.n_probes));
  for (int i = 0; i < cfg.n_probes; ++i) {
    SplitMix64 rng(derive_stream(cfg.seed, static_cast<std::uint64_t>(i)));
    const Vector z = draw_probe(rng, dim, cfg.probe_kind);
    samples.push_back(z.dot(applyM(z)));
  }
  const auto ms = mean_stderr(samples);
  return {ms.mean, ms.se, 0};
}

Estimate slq_logdet(const Matrix& A, const ProbeConfig& cfg) {
  require_spd(A, "slq_logdet");
  const int dim = static_cast<int>(A.rows());
  if (cfg.lanczos_steps < 2 || cfg.lanczos_steps > dim)
    fail(ErrKind::InvalidInput, "slq_logdet: need 2 <= lanczos_steps <= dim");

  int breakdowns = 0;
  std::vector<double> samples;
  samples.reserve(static_cast<size_t>(cfg.n_probes));

  for (int probe = 0; probe < cfg.n_probes; ++probe) {
    SplitMix64 rng(derive_stream(cfg.seed, static_cast<std::uint64_t>(probe)));
    const Vector z = draw_probe(rng, dim, cfg.probe_kind);
    const double zn2 = z.squaredNorm();

    // Lanczos with full reorthogonalization.
    const int m = cfg.lanczos_steps;
    Matrix V(dim, m);
    Vector alpha = Vector::Zero(m), beta = Vector::Zero(m);
    V.col(0) = z / std::sqrt(zn2);
    int steps = 0;
    for (int j = 0; j < m; ++j) {
      Vector w = A * V.col(j);
      alpha[j] = V.col(j).dot(w);
      w -= alpha[j] * V.col(j);
      if (j > 0) w -= beta[j - 1] * V.col(j - 1);
      // Full reorthogonalization against the current basis, twice.
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
      steps = j + 1;
      if (j + 1 == m) break;
      const double b = w.norm();
      if (b < 1e-14) {
        ++breakdowns;
        break;
      }
      beta[j] = b;
      V.col(j + 1) = w / b;
    }

    Matrix T = Matrix::Zero(steps, steps);
    for (int j = 0; j < steps; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < steps) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(T);
    if (es.info() != Eigen::Success) fail(ErrKind::NumericalError, "slq_logdet: eig failed");
    double quad = 0.0;
    for (int j = 0; j < steps; ++j) {
      const double node = es.eigenvalues()[j];
      if (!(node > 0.0)) fail(ErrKind::NotSPD, "slq_logdet: nonpositive Ritz value");
      const double w0 = es.eigenvectors()(0, j);
      quad += w0 * w0 * std::log(node);
    }
    samples.push_back(zn2 * quad);
  }
  const auto ms = mean_stderr(samples);
  return {ms.mean, ms.se, breakdowns};
}

MAContext::MAContext(double w_, double c_, double S_val_, Matrix H_)
    : w(w_), c(c_), S_val(S_val_), H(std::move(H_)) {
  if (!(w > 0.0)) fail(ErrKind::InvalidInput, "MAContext: w > 0 required");
  require_spd(H, "MAContext");
}

double ma_residual(const MAContext& ctx) {
  return logdet_chol(ctx.H) - std::log(ctx.w) + ctx.c * ctx.S_val;
}

double residual_printed(const MAContext& ctx) {
  return std::log(ctx.w) - logdet_chol(ctx.H) + ctx.c * ctx.S_val;
}

Matrix trust_region_update(const MAContext& ctx, double eta) {
  const double r = residual_printed(ctx);
  // exp(log H + eta r I) = e^{eta r} H: the shift is isotropic in log-space.
  return std::exp(eta * r) * ctx.H;
}

}  // namespace flatstep::logdet
