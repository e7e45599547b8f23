#include "flatstep/hodge.hpp"

#include <cmath>

namespace flatstep::hodge {

Complex2D::Complex2D(int nt, int ns) : n_t(nt), n_s(ns) {
  if (nt < 1 || ns < 1) fail(ErrKind::InvalidInput, "Complex2D: grid must be >= 1 x 1");
}

std::array<std::pair<int, int>, 4> Complex2D::face_boundary(int i, int j) const {
  return {{{hedge(i, j), +1},        // bottom, +t
           {vedge(i + 1, j), +1},    // right, +s
           {hedge(i, j + 1), -1},    // top
           {vedge(i, j), -1}}};      // left
}

Cochain::Cochain(int degree_, int d_, int n_cells) : degree(degree_), d(d_) {
  if (degree < 0 || degree > 2 || d < 1 || n_cells < 0)
    fail(ErrKind::InvalidInput, "Cochain: bad degree/dimension");
  values.assign(static_cast<size_t>(n_cells), Matrix::Zero(d, d));
}

double Cochain::norm2() const {
  double s = 0.0;
  for (const auto& v : values) s += v.squaredNorm();
  return s;
}

Cochain coboundary0(const Complex2D& K, const Cochain& f) {
  if (f.degree != 0 || f.values.size() != static_cast<size_t>(K.n_vertices()))
    fail(ErrKind::InvalidInput, "coboundary0: need a full 0-cochain");
  Cochain out(1, f.d, K.n_edges());
  for (int j = 0; j <= K.n_s; ++j)
    for (int i = 0; i < K.n_t; ++i)
      out.values[static_cast<size_t>(K.hedge(i, j))] =
          f.values[static_cast<size_t>(K.vertex(i + 1, j))] -
          f.values[static_cast<size_t>(K.vertex(i, j))];
  for (int j = 0; j < K.n_s; ++j)
    for (int i = 0; i <= K.n_t; ++i)
      out.values[static_cast<size_t>(K.vedge(i, j))] =
          f.values[static_cast<size_t>(K.vertex(i, j + 1))] -
          f.values[static_cast<size_t>(K.vertex(i, j))];
  return out;
}

Cochain coboundary(const Complex2D& K, const Cochain& xi) {
  if (xi.degree != 1 || xi.values.size() != static_cast<size_t>(K.n_edges()))
    fail(ErrKind::InvalidInput, "coboundary: need a full 1-cochain");
  Cochain out(2, xi.d, K.n_faces());
  for (int j = 0; j < K.n_s; ++j)
    for (int i = 0; i < K.n_t; ++i) {
      Matrix acc = Matrix::Zero(xi.d, xi.d);
      for (const auto& [e, sgn] : K.face_boundary(i, j))
        acc += static_cast<double>(sgn) * xi.values[static_cast<size_t>(e)];
      out.values[static_cast<size_t>(K.face(i, j))] = std::move(acc);
    }
  return out;
}

Cochain coboundary_adjoint(const Complex2D& K, const Cochain& c) {
  if (c.degree != 2 || c.values.size() != static_cast<size_t>(K.n_faces()))
    fail(ErrKind::InvalidInput, "coboundary_adjoint: need a full 2-cochain");
  Cochain out(1, c.d, K.n_edges());
  for (int j = 0; j < K.n_s; ++j)
    for (int i = 0; i < K.n_t; ++i) {
      const Matrix& v = c.values[static_cast<size_t>(K.face(i, j))];
      for (const auto& [e, sgn] : K.face_boundary(i, j))
        out.values[static_cast<size_t>(e)] += static_cast<double>(sgn) * v;
    }
  return out;
}

namespace {

double dot(const Cochain& a, const Cochain& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i)
    s += (a.values[i].array() * b.values[i].array()).sum();
  return s;
}

void axpy(Cochain& y, double alpha, const Cochain& x) {
  for (size_t i = 0; i < y.values.size(); ++i) y.values[i] += alpha * x.values[i];
}

}  // namespace

GaugeReduction gauge_reduce(const Complex2D& K, const Cochain& c, double tol, int max_iter) {
  if (!(tol > 0.0)) fail(ErrKind::InvalidInput, "gauge_reduce: tol > 0 required");
  if (c.degree != 2) fail(ErrKind::InvalidInput, "gauge_reduce: c must be a 2-cochain");

  // Edge-degree diagonal preconditioner: each edge touches at most 2 faces.
  std::vector<double> inv_deg(static_cast<size_t>(K.n_edges()), 0.0);
  for (int j = 0; j < K.n_s; ++j)
    for (int i = 0; i < K.n_t; ++i)
      for (const auto& [e, sgn] : K.face_boundary(i, j)) {
        (void)sgn;
        inv_deg[static_cast<size_t>(e)] += 1.0;
      }
  for (double& v : inv_deg) v = (v > 0.0) ? 1.0 / v : 1.0;

  auto precond = [&](const Cochain& r) {
    Cochain z = r;
    for (size_t e = 0; e < z.values.size(); ++e) z.values[e] *= inv_deg[e];
    return z;
  };
  auto normal_op = [&](const Cochain& xi) { return coboundary_adjoint(K, coboundary(K, xi)); };

  GaugeReduction out{Cochain(1, c.d, K.n_edges()), Cochain(2, c.d, K.n_faces()), 0.0, 0, false};
  Cochain rhs = coboundary_adjoint(K, c);
  const double rhs_norm = std::sqrt(rhs.norm2());

  Cochain r = rhs;  // residual of the normal equation at xi = 0
  Cochain z = precond(r);
  Cochain p = z;
  double rz = dot(r, z);

  if (rhs_norm == 0.0) {
    out.converged = true;
  } else {
    for (int it = 0; it < max_iter; ++it) {
      const Cochain Ap = normal_op(p);
      const double pAp = dot(p, Ap);
      if (pAp <= 0.0) break;  // numerically in the kernel; current iterate optimal
      const double alpha = rz / pAp;
      axpy(out.xi_star, alpha, p);
      axpy(r, -alpha, Ap);
      out.iterations = it + 1;
      if (std::sqrt(r.norm2()) <= tol * rhs_norm) {
        out.converged = true;
        break;
      }
      z = precond(r);
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (size_t e = 0; e < p.values.size(); ++e)
        p.values[e] = z.values[e] + beta * p.values[e];
    }
  }

  out.harmonic = c;
  const Cochain dxi = coboundary(K, out.xi_star);
  for (size_t f = 0; f < out.harmonic.values.size(); ++f) out.harmonic.values[f] -= dxi.values[f];
  out.energy = out.harmonic.norm2();
  return out;
}

Cochain curvature_cochain(const Complex2D& K,
                          const std::map<int, opcore::OperatorPair>& pairs, double h) {
  if (pairs.empty()) fail(ErrKind::InvalidInput, "curvature_cochain: no pairs");
  const int d = pairs.begin()->second.dim();
  Cochain out(2, d, K.n_faces());
  for (const auto& [f, pair] : pairs) {
    if (f < 0 || f >= K.n_faces()) fail(ErrKind::InvalidInput, "curvature_cochain: bad face id");
    if (pair.dim() != d) fail(ErrKind::InvalidInput, "curvature_cochain: unequal dimensions");
    out.values[static_cast<size_t>(f)] = opcore::holonomy(pair, h).log_hol;
  }
  return out;
}

}  // namespace flatstep::hodge
