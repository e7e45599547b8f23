#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flatstep/logdet.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace flatstep;
using namespace flatstep::logdet;

TEST_CASE("logdet_chol") {
  CHECK(logdet_chol(Matrix::Identity(5, 5)) == 0.0);

  Matrix d(2, 2);
  d << 1, 0, 0, 4;
  CHECK(logdet_chol(d) == doctest::Approx(std::log(4.0)).epsilon(1e-14));

  SplitMix64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix A = rng.random_spd(12, 0.3, 5.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    double want = 0.0;
    for (int i = 0; i < 12; ++i) want += std::log(es.eigenvalues()[i]);
    CHECK(std::abs(logdet_chol(A) - want) <= 1e-10 * std::max(1.0, std::abs(want)));
  }

  Matrix indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(logdet_chol(indef), Error);
}

TEST_CASE("hutchinson_trace: exact cases and statistical coverage") {
  ProbeConfig cfg;
  cfg.n_probes = 16;
  cfg.seed = 42;

  // M = I: every Rademacher probe gives exactly dim.
  const auto id = hutchinson_trace([](const Vector& z) { return z; }, 10, cfg);
  CHECK(id.estimate == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(id.stderr_ == 0.0);

  // Diagonal M: exact per probe, zero variance.
  Vector d(6);
  d << 1, 2, 3, 4, 5, 6;
  const auto diag = hutchinson_trace(
      [&](const Vector& z) { return (d.asDiagonal() * z).eval(); }, 6, cfg);
  CHECK(diag.estimate == doctest::Approx(21.0).epsilon(1e-14));
  CHECK(diag.stderr_ <= 1e-13);

  // Random symmetric M: |estimate - trace| <= 3 stderr in >= 99% of trials.
  SplitMix64 rng(7);
  const Matrix M = rng.random_symmetric(8);
  const double truth = M.trace();
  int covered = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    ProbeConfig c2;
    c2.n_probes = 64;
    c2.seed = derive_stream(1000, static_cast<std::uint64_t>(t));
    const auto est = hutchinson_trace([&](const Vector& z) { return (M * z).eval(); }, 8, c2);
    if (std::abs(est.estimate - truth) <= 3.0 * est.stderr_) ++covered;
  }
  CHECK(covered >= 990);
}

TEST_CASE("slq_logdet") {
  ProbeConfig cfg;
  cfg.n_probes = 8;
  cfg.seed = 5;
  cfg.lanczos_steps = 4;

  // A = I: T collapses to [1], estimate 0 (flagged breakdowns are fine).
  const auto id = slq_logdet(Matrix::Identity(6, 6), cfg);
  CHECK(id.estimate == doctest::Approx(0.0));
  CHECK(id.breakdowns == 8);

  // diag(1..10): within 3 stderr of log(10!) with Gaussian probes.
  Vector d(10);
  for (int i = 0; i < 10; ++i) d[i] = i + 1.0;
  double logfact = 0.0;
  for (int i = 1; i <= 10; ++i) logfact += std::log(static_cast<double>(i));
  ProbeConfig g;
  g.n_probes = 64;
  g.seed = 11;
  g.lanczos_steps = 10;
  g.probe_kind = ProbeKind::gaussian;
  const auto est = slq_logdet(Matrix(d.asDiagonal()), g);
  CHECK(std::abs(est.estimate - logfact) <= 3.0 * est.stderr_);

  // Rademacher probes on a diagonal matrix are exact per draw.
  ProbeConfig rad = g;
  rad.probe_kind = ProbeKind::rademacher;
  const auto exact = slq_logdet(Matrix(d.asDiagonal()), rad);
  CHECK(exact.estimate == doctest::Approx(logfact).epsilon(1e-10));

  // Bias decreases with Lanczos depth on a fixed rotated SPD matrix.
  SplitMix64 rng(13);
  const Matrix A = rng.random_spd(24, 0.2, 8.0);
  const double truth = logdet_chol(A);
  auto err_at = [&](int m) {
    ProbeConfig c3;
    c3.n_probes = 512;
    c3.seed = 2024;
    c3.lanczos_steps = m;
    return std::abs(slq_logdet(A, c3).estimate - truth);
  };
  CHECK(err_at(12) < err_at(4));

  CHECK_THROWS_AS(slq_logdet(Matrix::Identity(4, 4), ProbeConfig{4, ProbeKind::rademacher, 0, 9}),
                  Error);
}

TEST_CASE("ma_residual") {
  SplitMix64 rng(17);
  const int n = 5;
  const Matrix H = rng.random_spd(n, 0.5, 2.0);

  // Constructed fixed point: det H = w e^{-cS}.
  const double c = 0.7, S = 1.3;
  const double w = std::exp(logdet_chol(H) + c * S);
  CHECK(std::abs(ma_residual(MAContext(w, c, S, H))) <= 1e-12);

  // c = 0, w = det H.
  CHECK(std::abs(ma_residual(MAContext(std::exp(logdet_chol(H)), 0.0, 9.9, H))) <= 1e-12);

  // Scaling H by s shifts the residual by n log s exactly.
  const MAContext base(2.0, 0.3, 0.4, H);
  const double s = 1.7;
  const MAContext scaled(2.0, 0.3, 0.4, s * H);
  CHECK(ma_residual(scaled) - ma_residual(base) ==
        doctest::Approx(n * std::log(s)).epsilon(1e-12));

  // Printed driver and density residual differ by 2 c S.
  CHECK(residual_printed(base) + ma_residual(base) ==
        doctest::Approx(2.0 * 0.3 * 0.4).epsilon(1e-12));
}

TEST_CASE("trust_region_update") {
  SplitMix64 rng(29);
  const int n = 2;
  const Matrix H = rng.random_spd(n, 0.5, 2.0);

  // Fixed point: r = 0 keeps H.
  {
    const double w = std::exp(logdet_chol(H));  // c S = 0 and log w = logdet H
    MAContext ctx(w, 0.0, 0.0, H);
    CHECK((trust_region_update(ctx, 0.3) - H).norm() <= 1e-14);
  }

  // n = 2, eta = 0.25, r = 1 -> r+ = 0.5 (scalar recursion (1 - n eta) r).
  {
    const double cS = 0.0;
    const double w = std::exp(1.0 + logdet_chol(H) - cS);
    MAContext ctx(w, 0.0, 0.0, H);
    REQUIRE(residual_printed(ctx) == doctest::Approx(1.0).epsilon(1e-12));
    MAContext next(ctx.w, ctx.c, ctx.S_val, trust_region_update(ctx, 0.25));
    CHECK(residual_printed(next) == doctest::Approx(0.5).epsilon(1e-12));
  }

  // Recursion factor is exact to machine precision, eigenvectors preserved.
  {
    MAContext ctx(3.0, 0.4, 0.8, H);
    const double r0 = residual_printed(ctx);
    const double eta = 0.2;
    const Matrix Hn = trust_region_update(ctx, eta);
    MAContext next(ctx.w, ctx.c, ctx.S_val, Hn);
    CHECK(std::abs(residual_printed(next) - (1.0 - n * eta) * r0) <=
          1e-13 * std::max(1.0, std::abs(r0)));
    // Isotropic log-shift: H+ is a positive scalar multiple of H.
    const double ratio = Hn(0, 0) / H(0, 0);
    CHECK((Hn - ratio * H).norm() <= 1e-13 * H.norm());
  }

  // |density residual| strictly decreasing along iterations when cS = 0.
  {
    MAContext ctx(5.0, 0.0, 2.2, H);
    double prev = std::abs(ma_residual(ctx));
    Matrix Hk = H;
    for (int it = 0; it < 6; ++it) {
      Hk = trust_region_update(MAContext(5.0, 0.0, 2.2, Hk), 0.3);
      const double cur = std::abs(ma_residual(MAContext(5.0, 0.0, 2.2, Hk)));
      CHECK(cur < prev);
      prev = cur;
    }
    // Geometric convergence of logdet H to log w + cS.
    CHECK(prev <= std::pow(1.0 - 2 * 0.3, 6) * std::abs(ma_residual(MAContext(5.0, 0.0, 2.2, H))) +
                      1e-12);
  }
}
