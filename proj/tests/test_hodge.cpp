#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flatstep/hodge.hpp"

#include <Eigen/QR>

#include <cmath>

using namespace flatstep;
using namespace flatstep::hodge;

namespace {

Cochain random_cochain(SplitMix64& rng, int degree, int d, int n_cells, double scale = 0.7) {
  Cochain c(degree, d, n_cells);
  for (auto& v : c.values) v = rng.random_matrix(d, scale);
  return c;
}

// Dense coboundary matrix acting on vectorized scalar (d = 1) cochains.
Matrix dense_coboundary(const Complex2D& K) {
  Matrix D = Matrix::Zero(K.n_faces(), K.n_edges());
  for (int j = 0; j < K.n_s; ++j)
    for (int i = 0; i < K.n_t; ++i)
      for (const auto& [e, sgn] : K.face_boundary(i, j))
        D(K.face(i, j), e) = static_cast<double>(sgn);
  return D;
}

}  // namespace

TEST_CASE("coboundary: constant cancellation, locality, d∘d = 0") {
  const Complex2D K(4, 3);
  const int d = 2;

  // Constant 1-cochain: the four signed boundary values cancel.
  Cochain constant(1, d, K.n_edges());
  Matrix v(2, 2);
  v << 1, 2, 3, 4;
  for (auto& m : constant.values) m = v;
  const auto dc = coboundary(K, constant);
  for (const auto& m : dc.values) CHECK(m.norm() == 0.0);

  // Single supported edge hits only its adjacent faces.
  Cochain single(1, d, K.n_edges());
  const int e = K.hedge(1, 1);  // interior horizontal edge: two adjacent faces
  single.values[static_cast<size_t>(e)] = v;
  const auto ds = coboundary(K, single);
  int nonzero = 0;
  for (const auto& m : ds.values)
    if (m.norm() > 0) ++nonzero;
  CHECK(nonzero == 2);

  // d(d f) = 0 for 0-cochains (explicit sign bookkeeping).
  SplitMix64 rng(1);
  const auto f = random_cochain(rng, 0, d, K.n_vertices());
  const auto ddf = coboundary(K, coboundary0(K, f));
  for (const auto& m : ddf.values) CHECK(m.norm() <= 1e-14);

  Cochain wrong(2, d, K.n_faces());
  CHECK_THROWS_AS(coboundary(K, wrong), Error);
}

TEST_CASE("gauge_reduce: exact cocycle reduces to zero energy") {
  SplitMix64 rng(2);
  const Complex2D K(6, 5);
  const int d = 3;
  const auto xi0 = random_cochain(rng, 1, d, K.n_edges());
  const auto c = coboundary(K, xi0);
  const auto red = gauge_reduce(K, c, 1e-12, 20000);
  CHECK(red.converged);
  CHECK(red.energy <= 1e-16 * c.norm2());
}

TEST_CASE("gauge_reduce: orthogonal split, optimality, energy cap") {
  SplitMix64 rng(4);
  const Complex2D K(5, 4);
  const int d = 2;
  const auto c = random_cochain(rng, 2, d, K.n_faces());
  const auto red = gauge_reduce(K, c, 1e-12, 20000);

  // ||c||^2 = ||d xi*||^2 + ||harmonic||^2 within tolerance.
  const double split = coboundary(K, red.xi_star).norm2() + red.harmonic.norm2();
  CHECK(std::abs(c.norm2() - split) <= 1e-9 * c.norm2());

  // Energy never exceeds the input energy.
  CHECK(red.energy <= c.norm2() * (1.0 + 1e-12));

  // First-order optimality: <c - d xi*, d eta> ~ 0 for random directions.
  for (int trial = 0; trial < 50; ++trial) {
    const auto eta = random_cochain(rng, 1, d, K.n_edges());
    const auto deta = coboundary(K, eta);
    double inner = 0.0;
    for (size_t f = 0; f < deta.values.size(); ++f)
      inner += (red.harmonic.values[f].array() * deta.values[f].array()).sum();
    CHECK(std::abs(inner) <=
          1e-9 * std::sqrt(c.norm2()) * std::sqrt(deta.norm2()));
  }

  // delta* of the harmonic part vanishes (discrete Hodge projector).
  const auto dstar = coboundary_adjoint(K, red.harmonic);
  CHECK(dstar.norm2() <= 1e-16 * c.norm2());

  // Free-boundary grid: the coboundary is onto the 2-cochains, so the
  // orthogonal-to-image component of any input is essentially zero and the
  // reduction drives the energy to the floor.
  CHECK(red.energy <= 1e-12 * c.norm2());
  const auto again = gauge_reduce(K, red.harmonic, 1e-12, 20000);
  CHECK(again.energy <= red.harmonic.norm2() * (1.0 + 1e-12) + 1e-20);
}

TEST_CASE("gauge_reduce matches the dense least-squares oracle (scalar case)") {
  SplitMix64 rng(6);

  // 2x2 grid by hand-assembled dense normal equations, then a larger grid.
  for (auto [nt, ns] : {std::pair{2, 2}, std::pair{8, 7}}) {
    const Complex2D K(nt, ns);
    const Matrix D = dense_coboundary(K);
    Vector cv(K.n_faces());
    for (int f = 0; f < K.n_faces(); ++f) cv[f] = rng.normal();

    // Dense QR least squares on the vectorized system.
    const Vector xi_dense = D.colPivHouseholderQr().solve(cv);
    const Vector harmonic_dense = cv - D * xi_dense;

    Cochain c(2, 1, K.n_faces());
    for (int f = 0; f < K.n_faces(); ++f) c.values[static_cast<size_t>(f)](0, 0) = cv[f];
    const auto red = gauge_reduce(K, c, 1e-13, 50000);

    Vector harmonic_cg(K.n_faces());
    for (int f = 0; f < K.n_faces(); ++f)
      harmonic_cg[f] = red.harmonic.values[static_cast<size_t>(f)](0, 0);

    CHECK((harmonic_cg - harmonic_dense).norm() <=
          1e-8 * std::max(1.0, harmonic_dense.norm()));
    CHECK(red.energy == doctest::Approx(harmonic_dense.squaredNorm()).epsilon(1e-8));
  }
}

TEST_CASE("gauge_reduce respects the iteration cap") {
  SplitMix64 rng(9);
  const Complex2D K(6, 6);
  const auto c = random_cochain(rng, 2, 2, K.n_faces());
  const auto red = gauge_reduce(K, c, 1e-14, 2);
  CHECK_FALSE(red.converged);
  CHECK(red.iterations == 2);
  // The best iterate is still returned with a consistent harmonic part.
  CHECK(red.harmonic.values.size() == static_cast<size_t>(K.n_faces()));
}

TEST_CASE("curvature_cochain") {
  const Complex2D K(3, 2);
  Matrix h(2, 2), e(2, 2), hd(2, 2), ed(2, 2);
  h << 0, 1, 1, 0;
  e << 1, 0, 0, -1;
  hd << 1, 0, 0, 2;
  ed << 3, 0, 0, 4;

  // All faces commuting: zero cochain.
  std::map<int, opcore::OperatorPair> flat;
  for (int f = 0; f < K.n_faces(); ++f) flat.emplace(f, opcore::OperatorPair(hd, ed));
  const auto zero = curvature_cochain(K, flat, 0.05);
  CHECK(zero.norm2() <= 1e-24);

  // Single noncommuting face concentrates the energy there.
  std::map<int, opcore::OperatorPair> mixed;
  for (int f = 0; f < K.n_faces(); ++f)
    mixed.emplace(f, f == 2 ? opcore::OperatorPair(h, e) : opcore::OperatorPair(hd, ed));
  const auto c = curvature_cochain(K, mixed, 0.05);
  for (int f = 0; f < K.n_faces(); ++f) {
    if (f == 2)
      CHECK(c.values[static_cast<size_t>(f)].norm() > 1e-6);
    else
      CHECK(c.values[static_cast<size_t>(f)].norm() <= 1e-12);
  }

  // Total energy equals curvature_energy of the same holonomy reports.
  std::vector<opcore::HolonomyReport> reps;
  for (int f = 0; f < K.n_faces(); ++f)
    reps.push_back(opcore::holonomy(mixed.at(f), 0.05));
  CHECK(c.norm2() == doctest::Approx(opcore::curvature_energy(reps)).epsilon(1e-12));
}
