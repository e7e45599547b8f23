#include "flatstep/harness.hpp"

#include "flatstep/hodge.hpp"
#include "flatstep/logdet.hpp"
#include "flatstep/protocols.hpp"

#include <Eigen/Eigenvalues>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

namespace flatstep::harness {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int thread_cap() {
  const char* env = std::getenv("FLATSTEP_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

namespace {

struct CsvWriter {
  std::ofstream out;
  explicit CsvWriter(const std::string& path, const std::string& schema,
                     const std::vector<std::string>& columns) {
    out.open(path);
    if (!out) fail(ErrKind::InvalidInput, "cannot open output file " + path);
    out << "# schema=" << schema << "\n";
    for (size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << "\n";
  }
  void row(const std::vector<double>& vals) {
    for (size_t i = 0; i < vals.size(); ++i) out << (i ? "," : "") << fmt17(vals[i]);
    out << "\n";
  }
};

json check(const std::string& name, bool pass, double value, double threshold) {
  return json{{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}};
}

using Runner = std::function<void(const ExperimentConfig&, CsvWriter&, json&)>;

// ---------------------------------------------------------------------------
// calibrate-slopes
// ---------------------------------------------------------------------------

void run_calibrate_slopes(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const int dim = static_cast<int>(param_number(cfg, "dim"));
  const int pairs = static_cast<int>(param_number(cfg, "pairs"));
  const double h_lo = param_number(cfg, "h_lo");
  const double h_hi = param_number(cfg, "h_hi");
  const int n_h = static_cast<int>(param_number(cfg, "n_h"));
  const double rho = param_number(cfg, "rho");

  std::vector<double> sp, sa, sb, sf;
  for (int p = 0; p < pairs; ++p) {
    SplitMix64 rng(derive_stream(cfg.seed, static_cast<std::uint64_t>(p)));
    const auto pair = protocols::random_pair(rng, dim);
    const auto res = protocols::calibration_slopes(pair, h_lo, h_hi, n_h, rho);
    for (size_t i = 0; i < res.h.size(); ++i)
      csv.row({static_cast<double>(p), res.h[i], res.err_plain[i], res.err_a[i], res.err_b[i],
               res.err_filtered[i]});
    sp.push_back(res.slope_plain);
    sa.push_back(res.slope_a);
    sb.push_back(res.slope_b);
    sf.push_back(res.slope_filtered);
  }
  summary["slopes"] = {{"plain", sp}, {"variant_a", sa}, {"variant_b", sb}, {"filtered", sf}};
  bool ok_plain = true, ok_a = true, ok_b = true;
  for (double v : sp) ok_plain = ok_plain && std::abs(v - 2.0) <= 0.15;
  for (double v : sa) ok_a = ok_a && std::abs(v - 3.0) <= 0.15;
  for (double v : sb) ok_b = ok_b && std::abs(v - 3.0) <= 0.15;
  summary["checks"].push_back(check("slope_plain_2.0", ok_plain, sp.empty() ? 0 : sp[0], 0.15));
  summary["checks"].push_back(check("slope_variant_a_3.0", ok_a, sa.empty() ? 0 : sa[0], 0.15));
  summary["checks"].push_back(check("slope_variant_b_3.0", ok_b, sb.empty() ? 0 : sb[0], 0.15));
}

// ---------------------------------------------------------------------------
// order-select
// ---------------------------------------------------------------------------

void run_order_select(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const int dim = static_cast<int>(param_number(cfg, "dim"));
  const int trials = static_cast<int>(param_number(cfg, "trials"));
  const double sigma = param_number(cfg, "sigma");
  const double tau = param_number(cfg, "tau");

  int armijo_violations = 0;
  std::vector<double> hs, deltas;
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng(derive_stream(cfg.seed, static_cast<std::uint64_t>(t)));
    const Matrix A = rng.random_spd(dim, 0.2, 2.0);
    const Matrix B = rng.random_spd(dim, 0.2, 2.0);
    const Matrix S = A + B;
    const Vector g = rng.random_unit(dim);
    const auto sel = calib::select_order([&](const Vector& v) { return (A * v).eval(); },
                                         [&](const Vector& v) { return (B * v).eval(); }, g,
                                         1.0, sigma, tau, 20);
    csv.row({static_cast<double>(t), sel.lambda_hat, sel.h, sel.delta,
             static_cast<double>(sel.halvings),
             sel.order_chosen == calib::ApplyOrder::dr ? 0.0 : 1.0});
    hs.push_back(sel.h);
    deltas.push_back(sel.delta);

    // Armijo window at the analytic cap h = 2(1-sigma)/lambda_max(S).
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    const double h_cap = 2.0 * (1.0 - sigma) / es.eigenvalues().maxCoeff();
    for (int rep = 0; rep < 100; ++rep) {
      const Vector x = rng.random_vector(dim);
      const Vector Sx = S * x;
      const double f0 = 0.5 * x.dot(Sx);
      const Vector y = x - h_cap * Sx;
      const double f1 = 0.5 * y.dot(S * y);
      if (f1 > f0 - sigma * h_cap * Sx.squaredNorm() + 1e-12 * std::abs(f0))
        ++armijo_violations;
    }
  }
  summary["armijo_violations"] = armijo_violations;
  summary["checks"].push_back(
      check("armijo_zero_violations", armijo_violations == 0, armijo_violations, 0));
}

// ---------------------------------------------------------------------------
// stability-map
// ---------------------------------------------------------------------------

void run_stability_map(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const double eta1 = param_number(cfg, "eta1");
  const double mu = param_number(cfg, "mu");
  const double L = param_number(cfg, "L");
  const int grid = static_cast<int>(param_number(cfg, "grid"));
  const int lambda_grid = static_cast<int>(param_number(cfg, "lambda_grid"));
  const auto eta0_range = param_list(cfg, "eta0_range");
  const auto gamma1_range = param_list(cfg, "gamma1_range");
  if (eta0_range.size() != 2 || gamma1_range.size() != 2)
    fail(ErrKind::InvalidInput, "stability-map: eta0_range/gamma1_range need 2 entries");

  long stable_count = 0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double eta0 =
          eta0_range[0] + (eta0_range[1] - eta0_range[0]) * static_cast<double>(i) / (grid - 1);
      const double gamma1 = gamma1_range[0] + (gamma1_range[1] - gamma1_range[0]) *
                                                  static_cast<double>(j) / (grid - 1);
      const spectral::MethodCoefficients c(1, {eta0, eta1}, {gamma1});
      double rho_bar = 0.0;
      for (int l = 0; l < lambda_grid; ++l) {
        const double lam = mu + (L - mu) * static_cast<double>(l) / (lambda_grid - 1);
        rho_bar = std::max(rho_bar, spectral::modal_multipliers_m1(c, lam).rho_max);
      }
      const bool stable = rho_bar < 1.0 - 1e-12;
      stable_count += stable ? 1 : 0;
      csv.row({eta0, gamma1, stable ? 1.0 : 0.0, rho_bar});
    }
  summary["stable_fraction"] =
      static_cast<double>(stable_count) / (static_cast<double>(grid) * grid);
  summary["checks"].push_back(check("nonempty_stable_region", stable_count > 0,
                                    static_cast<double>(stable_count), 1));
}

// ---------------------------------------------------------------------------
// decay-ringing
// ---------------------------------------------------------------------------

void run_decay_ringing(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const double eta0 = param_number(cfg, "eta0");
  const double eta1 = param_number(cfg, "eta1");
  const double gamma1 = param_number(cfg, "gamma1");
  const double lambda = param_number(cfg, "lambda");
  const long k = static_cast<long>(param_number(cfg, "k"));

  const spectral::MethodCoefficients c(1, {eta0, eta1}, {gamma1});
  const auto mm = spectral::modal_multipliers_m1(c, lambda);
  if (!mm.oscillatory) fail(ErrKind::OutOfDomain, "decay-ringing: mode is not oscillatory");

  noise::NoiseModel quiet;
  quiet.sigma2[lambda] = 0.0;
  const auto y = noise::simulate_modal(c, lambda, quiet, {1.0, 0.9}, k);
  for (long t = 0; t < k; ++t) csv.row({static_cast<double>(t + 1), y[static_cast<size_t>(t)]});

  // Per-step energy decay over the window [100, 200]. The modal coordinate
  // z_k = y_k - r_- y_{k-1} demodulates the ringing phase, so |z_k|^2 decays
  // by exactly rho^2 per step.
  const std::complex<double> r_minus = std::conj(mm.roots[0]);
  auto zmag2 = [&](long t) {
    const std::complex<double> z =
        y[static_cast<size_t>(t)] - r_minus * y[static_cast<size_t>(t - 1)];
    return std::norm(z);
  };
  double num = 0.0, den = 0.0;
  for (long t = 101; t <= std::min<long>(200, k - 1); ++t) {
    num += zmag2(t);
    den += zmag2(t - 1);
  }
  const double measured_rate = num / den;
  const double predicted = mm.rho * mm.rho;
  const double freq = noise::dominant_frequency(y);
  const double bin = 2.0 * M_PI / static_cast<double>(y.size());

  summary["measured_rate"] = measured_rate;
  summary["predicted_rho2"] = predicted;
  summary["fft_freq"] = freq;
  summary["theta"] = mm.theta;
  summary["checks"].push_back(check("decay_rate_within_1pct",
                                    std::abs(measured_rate / predicted - 1.0) <= 0.01,
                                    measured_rate / predicted - 1.0, 0.01));
  summary["checks"].push_back(
      check("ring_freq_within_one_bin", std::abs(freq - mm.theta) <= bin + 1e-12,
            std::abs(freq - mm.theta), bin));
}

// ---------------------------------------------------------------------------
// noise-floor
// ---------------------------------------------------------------------------

struct FloorInstance {
  spectral::MethodCoefficients coeffs{1, {0.1, 0.0}, {0.0}};
  double lambda = 1.0;
  double sigma2 = 0.01;
};

FloorInstance random_stable_hb(SplitMix64& rng) {
  // Heavy-ball family (eta1 = 0): the modal innovation is white, so the
  // closed form, the Lyapunov solve, the PSD integral and long simulations
  // all describe the same stationary variance.
  for (;;) {
    FloorInstance inst;
    const double gamma1 = rng.uniform(0.0, 0.8);
    const double eta0 = rng.uniform(0.05, 1.2);
    inst.coeffs = spectral::MethodCoefficients(1, {eta0, 0.0}, {gamma1});
    inst.lambda = rng.uniform(0.5, 3.0);
    inst.sigma2 = rng.uniform(0.01, 0.2);
    const auto mm = spectral::modal_multipliers_m1(inst.coeffs, inst.lambda);
    if (mm.rho_max < 0.95 && spectral::jury_stable_m1(inst.coeffs, inst.lambda)) return inst;
  }
}

void run_noise_floor(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const int instances = static_cast<int>(param_number(cfg, "instances"));
  const long steps = static_cast<long>(param_number(cfg, "steps"));

  const int n_threads = std::min(thread_cap(), instances);

  std::vector<std::array<double, 7>> rows(static_cast<size_t>(instances));
  auto work = [&](int first, int last) {
    for (int i = first; i < last; ++i) {
      SplitMix64 rng(derive_stream(cfg.seed, static_cast<std::uint64_t>(i)));
      const auto inst = random_stable_hb(rng);
      noise::NoiseModel nm;
      nm.sigma2[inst.lambda] = inst.sigma2;
      nm.seed = derive_stream(cfg.seed, 1000 + static_cast<std::uint64_t>(i));
      const auto nu = spectral::SpectralMeasure::single(inst.lambda);

      const double closed = noise::p11_closed_m1(inst.coeffs, inst.lambda, inst.sigma2);
      const double lyap = noise::lyap_vec(inst.coeffs, inst.lambda, inst.sigma2).p11;
      const double psd = noise::psd_variance(inst.coeffs, inst.lambda, inst.sigma2, 1 << 14);
      const double floor = noise::noise_floor(inst.coeffs, nu, nm);
      const double upper = noise::floor_upper_bound(inst.coeffs, nu, nm);

      // Long-run plateau of f - f* = (lambda/2) y^2 after burn-in.
      const auto mm = spectral::modal_multipliers_m1(inst.coeffs, inst.lambda);
      const long burn = static_cast<long>(10.0 / (1.0 - mm.rho_max)) + 16;
      const auto y = noise::simulate_modal(inst.coeffs, inst.lambda, nm, {0.0, 0.0},
                                           steps + burn);
      double acc = 0.0;
      for (long t = burn; t < steps + burn; ++t)
        acc += y[static_cast<size_t>(t)] * y[static_cast<size_t>(t)];
      const double plateau = 0.5 * inst.lambda * acc / static_cast<double>(steps);

      rows[static_cast<size_t>(i)] = {static_cast<double>(i), floor,
                                      upper, plateau,
                                      std::abs(closed - lyap),
                                      std::abs(psd - lyap) / lyap,
                                      std::abs(plateau - floor) / floor};
    }
  };
  if (n_threads <= 1) {
    work(0, instances);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (instances + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back(work, t * chunk, std::min(instances, (t + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  double worst_closed_gap = 0.0, worst_psd_gap = 0.0, worst_mc_gap = 0.0;
  for (const auto& r : rows) {
    csv.row({r[0], r[1], r[2], r[3], r[4], r[5]});
    worst_closed_gap = std::max(worst_closed_gap, r[4]);
    worst_psd_gap = std::max(worst_psd_gap, r[5]);
    worst_mc_gap = std::max(worst_mc_gap, r[6]);
  }

  summary["worst_closed_vs_lyap"] = worst_closed_gap;
  summary["worst_psd_vs_lyap_rel"] = worst_psd_gap;
  summary["worst_mc_vs_floor_rel"] = worst_mc_gap;
  summary["checks"].push_back(
      check("closed_eq_lyap_1e-10", worst_closed_gap <= 1e-10, worst_closed_gap, 1e-10));
  summary["checks"].push_back(
      check("psd_eq_p11_1e-6", worst_psd_gap <= 1e-6, worst_psd_gap, 1e-6));
  summary["checks"].push_back(
      check("mc_plateau_within_10pct", worst_mc_gap <= 0.10, worst_mc_gap, 0.10));
}

// ---------------------------------------------------------------------------
// ellipsoid-run
// ---------------------------------------------------------------------------

void run_ellipsoid(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const int n = static_cast<int>(param_number(cfg, "n"));
  const double R = param_number(cfg, "R");
  const double r = param_number(cfg, "r");
  const int faces = static_cast<int>(param_number(cfg, "faces"));

  SplitMix64 rng(cfg.seed);
  const auto poly = protocols::random_ball_polytope(rng, n, R, r, faces);
  const long bound = ellipsoid::iteration_bound(n, R, r);
  const auto res =
      ellipsoid::run_feasibility(poly.oracle(), Vector::Zero(n), R, r, 4 * bound);

  double logdet0 = 2.0 * static_cast<double>(n) * std::log(R);
  double acc = logdet0;
  csv.row({0.0, logdet0, 0.0, 0.0});
  for (const auto& e : res.ledger.entries) {
    acc += 2.0 * e.delta_log_tau_bulk;
    csv.row({static_cast<double>(e.k), acc, e.delta_log_tau_bulk, e.switch_jump});
  }

  const double telescoped = res.ledger.bulk_sum();
  const double direct = 0.5 * (res.state.logdetP - logdet0);
  summary["found"] = res.found;
  summary["iterations"] = static_cast<double>(res.state.k);
  summary["iteration_bound"] = static_cast<double>(bound);
  summary["telescope_gap"] = std::abs(telescoped - direct);
  summary["checks"].push_back(check("found_within_bound", res.found && res.state.k <= bound,
                                    static_cast<double>(res.state.k),
                                    static_cast<double>(bound)));
  summary["checks"].push_back(check("tau_ledger_telescopes", std::abs(telescoped - direct) <=
                                    1e-8 * std::max(1.0, std::abs(direct)),
                                    std::abs(telescoped - direct), 1e-8));
}

// ---------------------------------------------------------------------------
// logdet-bench
// ---------------------------------------------------------------------------

void run_logdet_bench(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const int dim = static_cast<int>(param_number(cfg, "dim"));
  const int probes = static_cast<int>(param_number(cfg, "probes"));

  SplitMix64 rng(cfg.seed);
  // Diagonal SPD with distinct spectrum: the probe estimator is exact per
  // draw, isolating the Lanczos quadrature bias.
  Vector d(dim);
  for (int i = 0; i < dim; ++i) d[i] = 1.0 + static_cast<double>(i);
  const Matrix A = d.asDiagonal();
  const double truth = logdet::logdet_chol(A);

  logdet::ProbeConfig pc;
  pc.n_probes = probes;
  pc.seed = cfg.seed;
  pc.lanczos_steps = dim;
  const auto slq = logdet::slq_logdet(A, pc);

  const Matrix M = rng.random_spd(dim, 0.5, 4.0);
  const double trace_truth = M.trace();
  const auto hutch = logdet::hutchinson_trace(
      [&](const Vector& z) { return (M * z).eval(); }, dim, pc);

  csv.row({0.0, truth, slq.estimate, slq.stderr_});
  csv.row({1.0, trace_truth, hutch.estimate, hutch.stderr_});

  const double slq_rel = std::abs(slq.estimate - truth) / std::abs(truth);
  const double hutch_gap = std::abs(hutch.estimate - trace_truth);
  summary["slq_rel_error"] = slq_rel;
  summary["hutchinson_gap_stderr"] = hutch.stderr_ > 0 ? hutch_gap / hutch.stderr_ : 0.0;
  summary["checks"].push_back(check("slq_rel_1e-6", slq_rel <= 1e-6, slq_rel, 1e-6));
  summary["checks"].push_back(check("hutchinson_within_4se",
                                    hutch_gap <= 4.0 * std::max(hutch.stderr_, 1e-30),
                                    hutch_gap, 4.0 * hutch.stderr_));

  // Trust-region recursion factor.
  logdet::MAContext ctx(2.0, 0.5, 1.0, rng.random_spd(4, 0.5, 2.0));
  const double r0 = logdet::residual_printed(ctx);
  const double eta = 0.1;
  logdet::MAContext next(ctx.w, ctx.c, ctx.S_val, logdet::trust_region_update(ctx, eta));
  const double r1 = logdet::residual_printed(next);
  const double contraction_gap = std::abs(r1 - (1.0 - 4.0 * eta) * r0);
  summary["checks"].push_back(
      check("tr_recursion_machine_precision", contraction_gap <= 1e-12 * std::max(1.0, std::abs(r0)),
            contraction_gap, 1e-12));
}

// ---------------------------------------------------------------------------
// hodge-demo
// ---------------------------------------------------------------------------

void run_hodge_demo(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const int nt = static_cast<int>(param_number(cfg, "nt"));
  const int ns = static_cast<int>(param_number(cfg, "ns"));
  const int d = static_cast<int>(param_number(cfg, "d"));

  SplitMix64 rng(cfg.seed);
  const hodge::Complex2D K(nt, ns);

  hodge::Cochain xi0(1, d, K.n_edges());
  for (auto& v : xi0.values) v = rng.random_matrix(d, 0.5);
  const auto c_exact = hodge::coboundary(K, xi0);
  const auto red_exact = hodge::gauge_reduce(K, c_exact, 1e-12, 10000);

  hodge::Cochain c_rand(2, d, K.n_faces());
  for (auto& v : c_rand.values) v = rng.random_matrix(d, 0.5);
  const auto red_rand = hodge::gauge_reduce(K, c_rand, 1e-12, 10000);

  const double split_gap = std::abs(c_rand.norm2() -
                                    (hodge::coboundary(K, red_rand.xi_star).norm2() +
                                     red_rand.harmonic.norm2()));

  csv.row({0.0, c_exact.norm2(), red_exact.energy, static_cast<double>(red_exact.iterations)});
  csv.row({1.0, c_rand.norm2(), red_rand.energy, static_cast<double>(red_rand.iterations)});

  summary["exact_energy_ratio"] = red_exact.energy / c_exact.norm2();
  summary["split_gap_rel"] = split_gap / c_rand.norm2();
  summary["checks"].push_back(check("exact_cocycle_energy_1e-16",
                                    red_exact.energy <= 1e-16 * c_exact.norm2(),
                                    red_exact.energy / c_exact.norm2(), 1e-16));
  summary["checks"].push_back(check("orthogonal_split", split_gap <= 1e-8 * c_rand.norm2(),
                                    split_gap / c_rand.norm2(), 1e-8));
}

// ---------------------------------------------------------------------------
// chebyshev-compare
// ---------------------------------------------------------------------------

void run_chebyshev(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const int N = static_cast<int>(param_number(cfg, "N"));
  const double kappa = param_number(cfg, "kappa");
  const int grid = static_cast<int>(param_number(cfg, "grid"));
  const double mu = 1.0, L = kappa;

  const spectral::ChebyshevFilter f(N, mu, L);
  for (int i = 0; i < 257; ++i) {
    const double lam = mu + (L - mu) * static_cast<double>(i) / 256.0;
    csv.row({lam, f.evaluate(lam)});
  }

  const double sup = f.sup_residual(grid);
  const double cheb_rate = std::pow(sup, 1.0 / static_cast<double>(N));
  const double gd_rate = (kappa - 1.0) / (kappa + 1.0);
  const double target = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  const int extrema = protocols::equioscillation_count(f, grid, 1e-8);

  summary["sup_residual"] = sup;
  summary["cheb_rate"] = cheb_rate;
  summary["gd_rate"] = gd_rate;
  summary["minimax_rate"] = target;
  summary["equioscillation_extrema"] = extrema;
  summary["checks"].push_back(
      check("equioscillation_n_plus_1", extrema >= N + 1, extrema, N + 1));
  summary["checks"].push_back(check("beats_gd", cheb_rate < gd_rate, cheb_rate, gd_rate));
}

// ---------------------------------------------------------------------------
// adaptive-precond
// ---------------------------------------------------------------------------

void run_adaptive_precond(const ExperimentConfig& cfg, CsvWriter& csv, json& summary) {
  const int dim = static_cast<int>(param_number(cfg, "dim"));
  const int steps = static_cast<int>(param_number(cfg, "steps"));
  const double eta = param_number(cfg, "eta");
  const double zeta = param_number(cfg, "zeta");

  SplitMix64 rng(cfg.seed);
  Matrix H = rng.random_spd(dim, 0.5, 2.0);
  Matrix E = rng.random_spd(dim, 0.5, 2.0);
  // Targets diagonal in H's eigenbasis: commuting with H, so the projection
  // drives the mixed commutator down.
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  Vector dH(dim), dE(dim);
  for (int i = 0; i < dim; ++i) {
    dH[i] = rng.uniform(0.8, 1.5);
    dE[i] = rng.uniform(0.8, 1.5);
  }
  const Matrix Ht = es.eigenvectors() * dH.asDiagonal() * es.eigenvectors().transpose();
  const Matrix Et = es.eigenvectors() * dE.asDiagonal() * es.eigenvectors().transpose();

  double first = 0.0, last = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double comm = commutator(E, H).norm();
    if (s == 0) first = comm;
    last = comm;
    csv.row({static_cast<double>(s), comm});
    auto [Hn, En, Gn] = calib::adaptive_update(H, E, Ht, Et, eta, zeta);
    H = Hn;
    E = En;
  }
  summary["first_comm_norm"] = first;
  summary["last_comm_norm"] = last;
  summary["checks"].push_back(check("commutator_decreases", last < first, last, first));
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

ParamSpec num_param(double def, const std::string& help, bool required = false) {
  ParamSpec p;
  p.kind = ParamKind::number;
  p.required = required;
  p.default_value = def;
  p.help = help;
  return p;
}

ParamSpec list_param(std::vector<double> def, const std::string& help) {
  ParamSpec p;
  p.kind = ParamKind::list;
  p.default_value = std::move(def);
  p.help = help;
  return p;
}

struct Registered {
  ExperimentInfo info;
  Runner runner;
  std::vector<std::string> columns;
};

const std::vector<Registered>& registry() {
  static const std::vector<Registered> reg = [] {
    std::vector<Registered> r;
    r.push_back({{"calibrate-slopes",
                  "calibrate-slopes/v1",
                  {{"dim", num_param(8, "operator dimension")},
                   {"pairs", num_param(5, "number of random pairs")},
                   {"h_lo", num_param(1e-3, "smallest step")},
                   {"h_hi", num_param(1e-1, "largest step")},
                   {"n_h", num_param(9, "steps per decade sweep")},
                   {"rho", num_param(1.0, "filter safeguard parameter")}},
                  "one-step error slopes of the calibrated steps",
                  {}},
                 run_calibrate_slopes,
                 {"pair", "h", "err_plain", "err_A", "err_B", "err_filtered"}});
    r.push_back({{"order-select",
                  "order-select/v1",
                  {{"dim", num_param(16, "operator dimension")},
                   {"trials", num_param(20, "number of random SPD pairs")},
                   {"sigma", num_param(0.1, "Armijo parameter in (0, 1/2)")},
                   {"tau", num_param(0.25, "order diagnostic tolerance")}},
                  "matrix-free order selection and the shared Armijo window",
                  {}},
                 run_order_select,
                 {"trial", "lambda_hat", "h", "delta", "halvings", "order_rd"}});
    r.push_back({{"stability-map",
                  "stability-map/v1",
                  {{"eta1", num_param(0.0, "fixed eta1")},
                   {"mu", num_param(0.1, "band lower edge")},
                   {"L", num_param(10.0, "band upper edge")},
                   {"grid", num_param(200, "grid points per axis")},
                   {"lambda_grid", num_param(64, "lambda samples per cell")},
                   {"eta0_range", list_param({0.0, 0.4}, "eta0 axis range")},
                   {"gamma1_range", list_param({-1.0, 1.0}, "gamma1 axis range")}},
                  "Schur stability over an (eta0, gamma1) grid",
                  {}},
                 run_stability_map,
                 {"eta0", "gamma1", "stable", "rho_bar"}});
    r.push_back({{"decay-ringing",
                  "decay-ringing/v1",
                  {{"eta0", num_param(0.1, "eta0")},
                   {"eta1", num_param(0.0, "eta1")},
                   {"gamma1", num_param(0.995, "gamma1")},
                   {"lambda", num_param(1.0, "mode curvature")},
                   {"k", num_param(4096, "iterations")}},
                  "modal decay rate and ringing frequency vs prediction",
                  {}},
                 run_decay_ringing,
                 {"k", "y"}});
    r.push_back({{"noise-floor",
                  "noise-floor/v1",
                  {{"instances", num_param(10, "random stable instances")},
                   {"steps", num_param(1e6, "simulation steps per instance")}},
                  "analytic floor vs upper bound vs Monte-Carlo plateau",
                  {}},
                 run_noise_floor,
                 {"instance", "floor", "upper_bound", "mc_plateau", "closed_vs_lyap",
                  "psd_vs_lyap_rel"}});
    r.push_back({{"ellipsoid-run",
                  "ellipsoid-run/v1",
                  {{"n", num_param(2, "dimension", /*required=*/true)},
                   {"R", num_param(10.0, "outer ball radius")},
                   {"r", num_param(0.5, "promised inner ball radius")},
                   {"faces", num_param(8, "polytope faces")}},
                  "central-cut feasibility with tau ledger",
                  {}},
                 run_ellipsoid,
                 {"k", "logdetP", "bulk_shrink", "switch_jump"}});
    r.push_back({{"logdet-bench",
                  "logdet-bench/v1",
                  {{"dim", num_param(64, "matrix dimension")},
                   {"probes", num_param(256, "probe count")}},
                  "SLQ and Hutchinson estimators vs exact values",
                  {}},
                 run_logdet_bench,
                 {"case", "truth", "estimate", "stderr"}});
    r.push_back({{"hodge-demo",
                  "hodge-demo/v1",
                  {{"nt", num_param(8, "faces along t")},
                   {"ns", num_param(8, "faces along s")},
                   {"d", num_param(2, "value-module dimension")}},
                  "least-squares gauge reduction on a rectangular complex",
                  {}},
                 run_hodge_demo,
                 {"case", "input_energy", "residual_energy", "cg_iterations"}});
    r.push_back({{"chebyshev-compare",
                  "chebyshev-compare/v1",
                  {{"N", num_param(200, "filter degree")},
                   {"kappa", num_param(100.0, "condition number L/mu")},
                   {"grid", num_param(10001, "evaluation grid")}},
                  "Chebyshev residual filter vs gradient-descent rate",
                  {}},
                 run_chebyshev,
                 {"lambda", "p_N"}});
    r.push_back({{"adaptive-precond",
                  "adaptive-precond/v1",
                  {{"dim", num_param(6, "dimension")},
                   {"steps", num_param(10, "update steps")},
                   {"eta", num_param(0.15, "drift blend step")},
                   {"zeta", num_param(0.15, "diffusion blend step")}},
                  "parallel-sum adaptive preconditioner updates",
                  {}},
                 run_adaptive_precond,
                 {"step", "comm_norm"}});
    return r;
  }();
  return reg;
}

const Registered& find_experiment(const std::string& name) {
  for (const auto& r : registry())
    if (r.info.name == name) return r;
  fail(ErrKind::InvalidInput, "unknown experiment '" + name + "'");
}

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const auto& r : registry()) {
      ExperimentInfo info = r.info;
      info.csv_columns = r.columns;
      v.push_back(std::move(info));
    }
    return v;
  }();
  return infos;
}

ExperimentConfig parse_config_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrKind::InvalidInput, std::string("config parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [key, val] : j.items()) {
    if (key == "experiment") {
      cfg.experiment = val.get<std::string>();
    } else if (key == "seed") {
      cfg.seed = val.get<std::uint64_t>();
    } else if (key == "out") {
      cfg.out_path = val.get<std::string>();
    } else if (key == "params") {
      if (!val.is_object()) fail(ErrKind::InvalidInput, "config: params must be an object");
      // Kinds resolved during validate(); store raw values now.
      for (const auto& [k, v] : val.items()) {
        if (v.is_number())
          cfg.params[k] = v.get<double>();
        else if (v.is_array()) {
          std::vector<double> xs;
          for (const auto& e : v) xs.push_back(e.get<double>());
          cfg.params[k] = xs;
        } else if (v.is_string())
          cfg.params[k] = v.get<std::string>();
        else
          fail(ErrKind::InvalidInput, "config: unsupported value for param '" + k + "'");
      }
    } else {
      fail(ErrKind::InvalidInput, "config: unknown key '" + key + "'");
    }
  }
  if (cfg.experiment.empty()) fail(ErrKind::InvalidInput, "config: missing 'experiment'");
  return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& key_eq_value) {
  const auto eq = key_eq_value.find('=');
  if (eq == std::string::npos)
    fail(ErrKind::InvalidInput, "override must be key=value: " + key_eq_value);
  const std::string key = key_eq_value.substr(0, eq);
  const std::string value = key_eq_value.substr(eq + 1);
  if (key == "seed") {
    cfg.seed = std::stoull(value);
    return;
  }
  if (key == "out") {
    cfg.out_path = value;
    return;
  }
  // Comma-separated numbers become a list, one number stays scalar,
  // anything non-numeric is text.
  if (value.find(',') != std::string::npos) {
    std::vector<double> xs;
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) xs.push_back(std::stod(tok));
    cfg.params[key] = xs;
    return;
  }
  try {
    size_t pos = 0;
    const double d = std::stod(value, &pos);
    if (pos == value.size()) {
      cfg.params[key] = d;
      return;
    }
  } catch (...) {
  }
  cfg.params[key] = value;
}

void validate(ExperimentConfig& cfg) {
  const auto& exp = find_experiment(cfg.experiment);
  for (const auto& [key, val] : cfg.params) {
    const auto it = exp.info.schema.find(key);
    if (it == exp.info.schema.end())
      fail(ErrKind::InvalidInput,
           "experiment '" + cfg.experiment + "': unknown param '" + key + "'");
    const bool kind_ok =
        (it->second.kind == ParamKind::number && std::holds_alternative<double>(val)) ||
        (it->second.kind == ParamKind::list &&
         std::holds_alternative<std::vector<double>>(val)) ||
        (it->second.kind == ParamKind::text && std::holds_alternative<std::string>(val));
    if (!kind_ok)
      fail(ErrKind::InvalidInput,
           "experiment '" + cfg.experiment + "': wrong type for param '" + key + "'");
  }
  for (const auto& [key, spec] : exp.info.schema) {
    if (cfg.params.count(key)) continue;
    if (spec.required)
      fail(ErrKind::InvalidInput,
           "experiment '" + cfg.experiment + "': missing required param '" + key + "'");
    cfg.params[key] = spec.default_value;
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out_path;
  json params = json::object();
  for (const auto& [k, v] : cfg.params) {
    if (std::holds_alternative<double>(v))
      params[k] = std::get<double>(v);
    else if (std::holds_alternative<std::vector<double>>(v))
      params[k] = std::get<std::vector<double>>(v);
    else
      params[k] = std::get<std::string>(v);
  }
  j["params"] = params;
  return j.dump(2);
}

double param_number(const ExperimentConfig& cfg, const std::string& key) {
  const auto it = cfg.params.find(key);
  if (it == cfg.params.end() || !std::holds_alternative<double>(it->second))
    fail(ErrKind::InvalidInput, "missing numeric param '" + key + "'");
  return std::get<double>(it->second);
}

std::vector<double> param_list(const ExperimentConfig& cfg, const std::string& key) {
  const auto it = cfg.params.find(key);
  if (it == cfg.params.end() || !std::holds_alternative<std::vector<double>>(it->second))
    fail(ErrKind::InvalidInput, "missing list param '" + key + "'");
  return std::get<std::vector<double>>(it->second);
}

std::string param_text(const ExperimentConfig& cfg, const std::string& key) {
  const auto it = cfg.params.find(key);
  if (it == cfg.params.end() || !std::holds_alternative<std::string>(it->second))
    fail(ErrKind::InvalidInput, "missing text param '" + key + "'");
  return std::get<std::string>(it->second);
}

int run(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  try {
    validate(cfg);
  } catch (const Error& e) {
    std::cerr << "error kind=validation experiment=" << cfg.experiment
              << " msg=" << e.what() << "\n";
    return 2;
  }
  const auto& exp = find_experiment(cfg.experiment);
  try {
    CsvWriter csv(cfg.out_path + ".csv", exp.info.csv_schema, exp.columns);
    json summary;
    summary["inputs"] = json::parse(config_to_json(cfg));
    summary["checks"] = json::array();
    exp.runner(cfg, csv, summary);
    std::ofstream js(cfg.out_path + ".json");
    if (!js) fail(ErrKind::InvalidInput, "cannot open " + cfg.out_path + ".json");
    js << summary.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    const bool validation = e.kind == ErrKind::InvalidInput;
    std::cerr << "error kind=" << (validation ? "validation" : "numerical")
              << " experiment=" << cfg.experiment << " msg=" << e.what() << "\n";
    return validation ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error kind=numerical experiment=" << cfg.experiment << " msg=" << e.what()
              << "\n";
    return 3;
  }
}

}  // namespace flatstep::harness
