#pragma once

#include "flatstep/linalg.hpp"
#include "flatstep/operator_core.hpp"

#include <array>
#include <map>
#include <utility>
#include <vector>

namespace flatstep::hodge {

/// Rectangular 2-complex on an (n_t+1) x (n_s+1) vertex grid, free boundary.
/// Orientation: horizontal edges point +t, vertical +s, face boundaries
/// counterclockwise, so for the face at (i,j)
///   (d xi)(face) = xi(bottom) + xi(right) - xi(top) - xi(left).
struct Complex2D {
  int n_t, n_s;

  Complex2D(int nt, int ns);
  int n_vertices() const { return (n_t + 1) * (n_s + 1); }
  int n_hedges() const { return n_t * (n_s + 1); }
  int n_vedges() const { return (n_t + 1) * n_s; }
  int n_edges() const { return n_hedges() + n_vedges(); }
  int n_faces() const { return n_t * n_s; }

  int vertex(int i, int j) const { return i + j * (n_t + 1); }
  /// Horizontal edge from (i,j) to (i+1,j), 0 <= i < n_t.
  int hedge(int i, int j) const { return i + j * n_t; }
  /// Vertical edge from (i,j) to (i,j+1), 0 <= j < n_s.
  int vedge(int i, int j) const { return n_hedges() + i + j * (n_t + 1); }
  int face(int i, int j) const { return i + j * n_t; }

  /// Signed boundary edges of face (i,j): pairs (edge index, sign).
  std::array<std::pair<int, int>, 4> face_boundary(int i, int j) const;
};

/// Matrix-valued cochain: one d x d value per cell of the given degree.
struct Cochain {
  int degree = 1;  // 0, 1 or 2
  int d = 1;       // value-module matrix dimension
  std::vector<Matrix> values;

  Cochain(int degree_, int d_, int n_cells);
  static Cochain zeros(int degree, int d, int n_cells) { return Cochain(degree, d, n_cells); }
  double norm2() const;
};

/// Coboundary C^0 -> C^1: (d f)(edge u->v) = f(v) - f(u).
Cochain coboundary0(const Complex2D& K, const Cochain& f);

/// Coboundary C^1 -> C^2 with the fixed face orientation.
Cochain coboundary(const Complex2D& K, const Cochain& xi);

/// L2 adjoint of the coboundary, C^2 -> C^1.
Cochain coboundary_adjoint(const Complex2D& K, const Cochain& c);

struct GaugeReduction {
  Cochain xi_star;
  Cochain harmonic;   // c - d xi_star
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Least-squares gauge reduction: minimize ||c - d xi||^2 over 1-cochains by
/// conjugate gradients on the normal equation d* d xi = d* c (edge-degree
/// diagonal preconditioner). When max_iter is exceeded the best iterate is
/// returned with converged = false.
GaugeReduction gauge_reduce(const Complex2D& K, const Cochain& c, double tol, int max_iter);

/// Per-face log-holonomy 2-cochain from an operator pair per face.
Cochain curvature_cochain(const Complex2D& K,
                          const std::map<int, opcore::OperatorPair>& pairs, double h);

}  // namespace flatstep::hodge
