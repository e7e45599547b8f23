#include "flatstep/calibration.hpp"
#include "flatstep/ellipsoid.hpp"
#include "flatstep/hodge.hpp"
#include "flatstep/logdet.hpp"
#include "flatstep/multistep.hpp"
#include "flatstep/operator_core.hpp"
#include "flatstep/stochastic.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace flatstep;

namespace {

spectral::SpectralMeasure measure_from(const std::vector<std::pair<double, double>>& atoms,
                                       double mu, double L) {
  std::vector<spectral::SpectralMeasure::Atom> a;
  for (const auto& [lam, w] : atoms) a.push_back({lam, w});
  return spectral::SpectralMeasure(std::move(a), mu, L);
}

noise::NoiseModel noise_from(const std::map<double, double>& sigma2, std::uint64_t seed) {
  noise::NoiseModel nm;
  nm.sigma2 = sigma2;
  nm.seed = seed;
  return nm;
}

}  // namespace

PYBIND11_MODULE(_flatstep, m) {
  m.doc() = "curvature, calibration, spectral and determinantal diagnostics for "
            "two-channel update operators";

  py::register_exception<Error>(m, "FlatstepError");

  // ---- operator core -------------------------------------------------
  m.def("expm", &expm, py::arg("a"), "matrix exponential");
  m.def("logm", &logm, py::arg("a"), "principal matrix logarithm");
  m.def("commutator", &commutator, py::arg("a"), py::arg("b"), "[A,B] = AB - BA");

  py::class_<opcore::OperatorPair>(m, "OperatorPair")
      .def(py::init<Matrix, Matrix>(), py::arg("H"), py::arg("E"))
      .def_readonly("H", &opcore::OperatorPair::H)
      .def_readonly("E", &opcore::OperatorPair::E)
      .def_property_readonly("dim", &opcore::OperatorPair::dim);

  py::class_<opcore::HolonomyReport>(m, "HolonomyReport")
      .def_readonly("h", &opcore::HolonomyReport::h)
      .def_readonly("log_hol", &opcore::HolonomyReport::log_hol)
      .def_readonly("leading_commutator", &opcore::HolonomyReport::leading_commutator)
      .def_readonly("energy", &opcore::HolonomyReport::energy);

  py::class_<opcore::JetSeries>(m, "JetSeries")
      .def(py::init<std::vector<Matrix>>(), py::arg("coeffs"))
      .def_readonly("coeffs", &opcore::JetSeries::coeffs)
      .def("eval", &opcore::JetSeries::eval, py::arg("h"));

  m.def("holonomy", &opcore::holonomy, py::arg("pair"), py::arg("h"));
  m.def("bch_compose", &opcore::bch_compose, py::arg("x"), py::arg("y"), py::arg("order"));
  m.def("jet_flatness_order", &opcore::jet_flatness_order, py::arg("x"), py::arg("y"),
        py::arg("alpha"), py::arg("tol"));
  m.def("curvature_energy", &opcore::curvature_energy, py::arg("reports"));
  m.def("axis_energies", &opcore::axis_energies, py::arg("jets_t"), py::arg("jets_s"));
  m.def("resolvent_log_jet", &opcore::resolvent_log_jet, py::arg("a"), py::arg("order"));

  // ---- calibration ----------------------------------------------------
  py::class_<calib::GaugeSolution>(m, "GaugeSolution")
      .def_readonly("Z", &calib::GaugeSolution::Z)
      .def_readonly("residual", &calib::GaugeSolution::residual)
      .def_readonly("damping", &calib::GaugeSolution::damping);

  py::enum_<calib::StepVariant>(m, "StepVariant")
      .value("A", calib::StepVariant::A)
      .value("B", calib::StepVariant::B)
      .value("Filtered", calib::StepVariant::Filtered)
      .value("Plain", calib::StepVariant::Plain);

  py::class_<calib::StepResult>(m, "StepResult")
      .def_readonly("x_next", &calib::StepResult::x_next)
      .def_readonly("variant", &calib::StepResult::variant)
      .def_readonly("h", &calib::StepResult::h)
      .def_readonly("diagnostics", &calib::StepResult::diagnostics);

  m.def("sylvester_schur", &calib::sylvester_schur, py::arg("S"), py::arg("C"), py::arg("eps"));
  m.def("sylvester_eigen", &calib::sylvester_eigen, py::arg("S"), py::arg("C"), py::arg("tau"));
  m.def("gauge_for_pair", &calib::gauge_for_pair, py::arg("pair"), py::arg("tau") = 0.0);
  m.def("calibrated_step_A", &calib::calibrated_step_A, py::arg("pair"), py::arg("x"),
        py::arg("g"), py::arg("h"), py::arg("Z"));
  m.def("calibrated_step_B", &calib::calibrated_step_B, py::arg("pair"), py::arg("x"),
        py::arg("g"), py::arg("h"));
  m.def("curvature_filtered_step", &calib::curvature_filtered_step, py::arg("pair"),
        py::arg("x"), py::arg("g"), py::arg("h"), py::arg("rho"));
  m.def("parallel_sum", &calib::parallel_sum, py::arg("A"), py::arg("B"));
  m.def("adaptive_update", &calib::adaptive_update, py::arg("H"), py::arg("E"),
        py::arg("H_target"), py::arg("E_target"), py::arg("eta"), py::arg("zeta"));

  py::enum_<calib::ApplyOrder>(m, "ApplyOrder")
      .value("dr", calib::ApplyOrder::dr)
      .value("rd", calib::ApplyOrder::rd);

  py::class_<calib::OrderSelection>(m, "OrderSelection")
      .def_readonly("h", &calib::OrderSelection::h)
      .def_readonly("lambda_hat", &calib::OrderSelection::lambda_hat)
      .def_readonly("delta", &calib::OrderSelection::delta)
      .def_readonly("order_chosen", &calib::OrderSelection::order_chosen)
      .def_readonly("halvings", &calib::OrderSelection::halvings);

  m.def("select_order", &calib::select_order, py::arg("applyA"), py::arg("applyB"),
        py::arg("g"), py::arg("h_max"), py::arg("sigma"), py::arg("tau_diag"),
        py::arg("max_halvings") = 20);

  // ---- multistep spectral ----------------------------------------------
  py::class_<spectral::MethodCoefficients>(m, "MethodCoefficients")
      .def(py::init<int, std::vector<double>, std::vector<double>>(), py::arg("m"),
           py::arg("eta"), py::arg("gamma"))
      .def_readonly("m", &spectral::MethodCoefficients::m)
      .def_readonly("eta", &spectral::MethodCoefficients::eta)
      .def_readonly("gamma", &spectral::MethodCoefficients::gamma)
      .def_static("gradient_descent", &spectral::MethodCoefficients::gradient_descent)
      .def_static("heavy_ball", &spectral::MethodCoefficients::heavy_ball);

  py::class_<spectral::ModalMultipliers>(m, "ModalMultipliers")
      .def_readonly("lambda_", &spectral::ModalMultipliers::lambda)
      .def_readonly("roots", &spectral::ModalMultipliers::roots)
      .def_readonly("rho_max", &spectral::ModalMultipliers::rho_max)
      .def_readonly("oscillatory", &spectral::ModalMultipliers::oscillatory)
      .def_readonly("rho", &spectral::ModalMultipliers::rho)
      .def_readonly("theta", &spectral::ModalMultipliers::theta);

  py::class_<spectral::StabilityReport>(m, "StabilityReport")
      .def_readonly("schur_stable", &spectral::StabilityReport::schur_stable)
      .def_readonly("rho_bar", &spectral::StabilityReport::rho_bar)
      .def_readonly("violations", &spectral::StabilityReport::violations);

  m.def("char_poly", &spectral::char_poly, py::arg("coeffs"), py::arg("lambda_"));
  m.def("companion", &spectral::companion, py::arg("coeffs"), py::arg("lambda_"));
  m.def("modal_roots", &spectral::modal_roots, py::arg("coeffs"), py::arg("lambda_"));
  m.def("modal_multipliers_m1", &spectral::modal_multipliers_m1, py::arg("coeffs"),
        py::arg("lambda_"));
  m.def("jury_stable_m1", &spectral::jury_stable_m1, py::arg("coeffs"), py::arg("lambda_"));
  m.def("stability_report", &spectral::stability_report, py::arg("coeffs"), py::arg("mu"),
        py::arg("L"), py::arg("grid"));
  m.def(
      "bulk_exponent",
      [](const spectral::MethodCoefficients& c,
         const std::vector<std::pair<double, double>>& atoms, double mu, double L) {
        return spectral::bulk_exponent(c, measure_from(atoms, mu, L));
      },
      py::arg("coeffs"), py::arg("atoms"), py::arg("mu"), py::arg("L"));
  m.def("theta_prime_m1", &spectral::theta_prime_m1, py::arg("coeffs"), py::arg("lambda_"));
  m.def("stationary_points_m1", &spectral::stationary_points_m1, py::arg("coeffs"),
        py::arg("mu"), py::arg("L"));
  m.def("airy_amplitude", &spectral::airy_amplitude, py::arg("coeffs"), py::arg("lambda_star"));
  m.def("stokes_jump_m1", &spectral::stokes_jump_m1, py::arg("coeffs"), py::arg("lambda_wall"),
        py::arg("r_wall"));
  m.def(
      "nonasymptotic_bound",
      [](const spectral::MethodCoefficients& c,
         const std::vector<std::pair<double, double>>& atoms, double mu, double L,
         double c_init, int k, double stokes) {
        return spectral::nonasymptotic_bound(c, measure_from(atoms, mu, L), c_init, k, stokes);
      },
      py::arg("coeffs"), py::arg("atoms"), py::arg("mu"), py::arg("L"), py::arg("C_init"),
      py::arg("k"), py::arg("stokes_product") = 1.0);

  py::class_<spectral::ChebyshevFilter>(m, "ChebyshevFilter")
      .def(py::init<int, double, double>(), py::arg("N"), py::arg("mu"), py::arg("L"))
      .def_readonly("N", &spectral::ChebyshevFilter::N)
      .def("evaluate", &spectral::ChebyshevFilter::evaluate, py::arg("lambda_"))
      .def("sup_residual", &spectral::ChebyshevFilter::sup_residual, py::arg("grid"))
      .def("sup_exp_gap", &spectral::ChebyshevFilter::sup_exp_gap, py::arg("h"), py::arg("grid"))
      .def("monomial_coeffs", &spectral::ChebyshevFilter::monomial_coeffs);

  // ---- stochastic floor --------------------------------------------------
  py::class_<noise::StationaryCovariance>(m, "StationaryCovariance")
      .def_readonly("lambda_", &noise::StationaryCovariance::lambda)
      .def_readonly("P", &noise::StationaryCovariance::P)
      .def_readonly("p11", &noise::StationaryCovariance::p11);

  m.def(
      "simulate_modal",
      [](const spectral::MethodCoefficients& c, double lam,
         const std::map<double, double>& sigma2, std::uint64_t seed,
         const std::vector<double>& y_init, long k) {
        return noise::simulate_modal(c, lam, noise_from(sigma2, seed), y_init, k);
      },
      py::arg("coeffs"), py::arg("lambda_"), py::arg("sigma2"), py::arg("seed"),
      py::arg("y_init"), py::arg("k"));
  m.def("p11_closed_m1", &noise::p11_closed_m1, py::arg("coeffs"), py::arg("lambda_"),
        py::arg("sigma2"));
  m.def("lyap_vec", &noise::lyap_vec, py::arg("coeffs"), py::arg("lambda_"), py::arg("sigma2"));
  m.def(
      "noise_floor",
      [](const spectral::MethodCoefficients& c,
         const std::vector<std::pair<double, double>>& atoms, double mu, double L,
         const std::map<double, double>& sigma2) {
        return noise::noise_floor(c, measure_from(atoms, mu, L), noise_from(sigma2, 0));
      },
      py::arg("coeffs"), py::arg("atoms"), py::arg("mu"), py::arg("L"), py::arg("sigma2"));
  m.def(
      "floor_upper_bound",
      [](const spectral::MethodCoefficients& c,
         const std::vector<std::pair<double, double>>& atoms, double mu, double L,
         const std::map<double, double>& sigma2) {
        return noise::floor_upper_bound(c, measure_from(atoms, mu, L), noise_from(sigma2, 0));
      },
      py::arg("coeffs"), py::arg("atoms"), py::arg("mu"), py::arg("L"), py::arg("sigma2"));
  m.def("psd_variance", &noise::psd_variance, py::arg("coeffs"), py::arg("lambda_"),
        py::arg("sigma2"), py::arg("n_omega"));
  m.def(
      "expectation_bound",
      [](const spectral::MethodCoefficients& c,
         const std::vector<std::pair<double, double>>& atoms, double mu, double L,
         const std::map<double, double>& sigma2, double c_det, long k) {
        return noise::expectation_bound(c, measure_from(atoms, mu, L), noise_from(sigma2, 0),
                                        c_det, k);
      },
      py::arg("coeffs"), py::arg("atoms"), py::arg("mu"), py::arg("L"), py::arg("sigma2"),
      py::arg("C_det"), py::arg("k"));
  m.def("dominant_frequency", &noise::dominant_frequency, py::arg("series"));
  m.def(
      "stokes_trigger_scale",
      [](const spectral::MethodCoefficients& c,
         const std::vector<std::pair<double, double>>& atoms, double mu, double L,
         const std::map<double, double>& sigma2) {
        return noise::stokes_trigger_scale(c, measure_from(atoms, mu, L),
                                           noise_from(sigma2, 0));
      },
      py::arg("coeffs"), py::arg("atoms"), py::arg("mu"), py::arg("L"), py::arg("sigma2"));

  // ---- ellipsoid -----------------------------------------------------------
  py::class_<ellipsoid::EllipsoidState>(m, "EllipsoidState")
      .def(py::init<Vector, Matrix>(), py::arg("x"), py::arg("P"))
      .def_readonly("x", &ellipsoid::EllipsoidState::x)
      .def_readonly("P", &ellipsoid::EllipsoidState::P)
      .def_readonly("logdetP", &ellipsoid::EllipsoidState::logdetP)
      .def_readonly("k", &ellipsoid::EllipsoidState::k);

  py::class_<ellipsoid::TauLedger>(m, "TauLedger")
      .def("bulk_sum", &ellipsoid::TauLedger::bulk_sum)
      .def("jump_sum", &ellipsoid::TauLedger::jump_sum)
      .def("__len__", [](const ellipsoid::TauLedger& l) { return l.entries.size(); })
      .def("entry",
           [](const ellipsoid::TauLedger& l, size_t i) {
             const auto& e = l.entries.at(i);
             return py::make_tuple(e.k, e.delta_log_tau_bulk, e.switch_jump);
           });

  m.def("ellipsoid_step", &ellipsoid::ellipsoid_step, py::arg("state"), py::arg("g"));
  m.def("bulk_shrink", &ellipsoid::bulk_shrink, py::arg("n"));
  m.def("iteration_bound", &ellipsoid::iteration_bound, py::arg("n"), py::arg("R"),
        py::arg("r"), py::arg("stokes_sum") = 0.0);
  m.def("switch_jump", &ellipsoid::switch_jump, py::arg("u1"), py::arg("u2"), py::arg("a"),
        py::arg("b"), py::arg("alpha_n"));
  m.def(
      "run_feasibility",
      [](const std::function<py::tuple(const Vector&)>& oracle, const Vector& x0, double R,
         double r, long max_iter) {
        ellipsoid::Oracle wrapped = [&oracle](const Vector& x) {
          const py::tuple t = oracle(x);
          ellipsoid::SeparationOracleResult res;
          res.feasible = t[0].cast<bool>();
          if (!res.feasible && t.size() > 1 && !t[1].is_none()) res.g = t[1].cast<Vector>();
          if (t.size() > 2 && !t[2].is_none()) res.face_id = t[2].cast<int>();
          return res;
        };
        auto out = ellipsoid::run_feasibility(wrapped, x0, R, r, max_iter);
        return py::make_tuple(out.found, out.state, out.ledger);
      },
      py::arg("oracle"), py::arg("x0"), py::arg("R"), py::arg("r"), py::arg("max_iter"),
      "oracle(x) returns (feasible, g_or_None, face_id_or_None)");

  // ---- log-det machinery ------------------------------------------------
  py::enum_<logdet::ProbeKind>(m, "ProbeKind")
      .value("rademacher", logdet::ProbeKind::rademacher)
      .value("gaussian", logdet::ProbeKind::gaussian);

  py::class_<logdet::ProbeConfig>(m, "ProbeConfig")
      .def(py::init([](int n_probes, logdet::ProbeKind kind, std::uint64_t seed,
                       int lanczos_steps) {
             return logdet::ProbeConfig{n_probes, kind, seed, lanczos_steps};
           }),
           py::arg("n_probes") = 32, py::arg("probe_kind") = logdet::ProbeKind::rademacher,
           py::arg("seed") = 0, py::arg("lanczos_steps") = 16)
      .def_readwrite("n_probes", &logdet::ProbeConfig::n_probes)
      .def_readwrite("probe_kind", &logdet::ProbeConfig::probe_kind)
      .def_readwrite("seed", &logdet::ProbeConfig::seed)
      .def_readwrite("lanczos_steps", &logdet::ProbeConfig::lanczos_steps);

  py::class_<logdet::Estimate>(m, "Estimate")
      .def_readonly("estimate", &logdet::Estimate::estimate)
      .def_readonly("stderr", &logdet::Estimate::stderr_)
      .def_readonly("breakdowns", &logdet::Estimate::breakdowns);

  py::class_<logdet::MAContext>(m, "MAContext")
      .def(py::init<double, double, double, Matrix>(), py::arg("w"), py::arg("c"),
           py::arg("S_val"), py::arg("H"))
      .def_readonly("w", &logdet::MAContext::w)
      .def_readonly("c", &logdet::MAContext::c)
      .def_readonly("S_val", &logdet::MAContext::S_val)
      .def_readonly("H", &logdet::MAContext::H);

  m.def("logdet_chol", &logdet::logdet_chol, py::arg("A"));
  m.def("hutchinson_trace", &logdet::hutchinson_trace, py::arg("applyM"), py::arg("dim"),
        py::arg("cfg"));
  m.def("slq_logdet", &logdet::slq_logdet, py::arg("A"), py::arg("cfg"));
  m.def("ma_residual", &logdet::ma_residual, py::arg("ctx"));
  m.def("residual_printed", &logdet::residual_printed, py::arg("ctx"));
  m.def("trust_region_update", &logdet::trust_region_update, py::arg("ctx"), py::arg("eta"));

  // ---- hodge ---------------------------------------------------------------
  py::class_<hodge::Complex2D>(m, "Complex2D")
      .def(py::init<int, int>(), py::arg("n_t"), py::arg("n_s"))
      .def_readonly("n_t", &hodge::Complex2D::n_t)
      .def_readonly("n_s", &hodge::Complex2D::n_s)
      .def("n_edges", &hodge::Complex2D::n_edges)
      .def("n_faces", &hodge::Complex2D::n_faces)
      .def("n_vertices", &hodge::Complex2D::n_vertices);

  py::class_<hodge::Cochain>(m, "Cochain")
      .def(py::init<int, int, int>(), py::arg("degree"), py::arg("d"), py::arg("n_cells"))
      .def_readonly("degree", &hodge::Cochain::degree)
      .def_readonly("d", &hodge::Cochain::d)
      .def_readwrite("values", &hodge::Cochain::values)
      .def("norm2", &hodge::Cochain::norm2);

  py::class_<hodge::GaugeReduction>(m, "GaugeReduction")
      .def_readonly("xi_star", &hodge::GaugeReduction::xi_star)
      .def_readonly("harmonic", &hodge::GaugeReduction::harmonic)
      .def_readonly("energy", &hodge::GaugeReduction::energy)
      .def_readonly("iterations", &hodge::GaugeReduction::iterations)
      .def_readonly("converged", &hodge::GaugeReduction::converged);

  m.def("coboundary0", &hodge::coboundary0, py::arg("complex"), py::arg("f"));
  m.def("coboundary", &hodge::coboundary, py::arg("complex"), py::arg("xi"));
  m.def("coboundary_adjoint", &hodge::coboundary_adjoint, py::arg("complex"), py::arg("c"));
  m.def("gauge_reduce", &hodge::gauge_reduce, py::arg("complex"), py::arg("c"), py::arg("tol"),
        py::arg("max_iter"));
  m.def("curvature_cochain", &hodge::curvature_cochain, py::arg("complex"), py::arg("pairs"),
        py::arg("h"));

  m.attr("__version__") = "0.1.0";
}
