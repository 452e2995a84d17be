#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "magdwell/geometry.hpp"

namespace magdwell {

using cplx = std::complex<double>;

// Origin-centered uniform grid on [-L, L]^2 with an odd number of points per
// axis, so that (0,0) is a grid point and x -> -x is an exact index
// permutation.  Coordinates are computed as (j - m)*h with m the center
// index; this makes coord(m+k) == -coord(m-k) bit-exact.
struct Grid2D {
  int n = 0;               // points per axis (odd)
  double half_width = 0.0; // L
  double spacing = 0.0;    // h = 2L/(n-1)

  Grid2D() = default;
  Grid2D(int n_points, double L);

  int center() const { return (n - 1) / 2; }
  double coord(int j) const { return (j - center()) * spacing; }
  Point2 point(int ix, int iy) const { return {coord(ix), coord(iy)}; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }
  // Row-major: iy is the row (second coordinate), ix the column (first).
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * n + ix;
  }
  bool same_as(const Grid2D& o) const;
};

// Complex scalar field sampled on a Grid2D.
struct GridField {
  Grid2D grid;
  std::vector<cplx> values;

  GridField() = default;
  explicit GridField(const Grid2D& g) : grid(g), values(g.size(), cplx(0.0)) {}

  cplx& at(int ix, int iy) { return values[grid.index(ix, iy)]; }
  const cplx& at(int ix, int iy) const { return values[grid.index(ix, iy)]; }
};

// Discrete L^2 pairing with weight h^2: <f,g> = h^2 * sum conj(f_j) g_j.
cplx inner(const GridField& f, const GridField& g);
double norm(const GridField& f);

// (Pf)(x) = f(-x): exact index permutation (n odd).  An involution.
GridField parity(const GridField& f);

// (Tf)(x1, x2) = conj(f(x1, -x2)): the antiunitary x2-mirror.  Fields of
// mirror-symmetric operators can be chosen T-invariant; enforcing that
// symmetry makes mirror-paired phase cancellations exact in sums.
GridField mirror_conjugate(const GridField& f);

// Zak magnetic translation (R^z f)(x) = exp(i (lambda/2) x.z_perp) f(x - z)
// with z_perp = (-z2, z1).  z must align with the lattice (integer multiples
// of h within a small snap tolerance); samples shifted in from outside the
// box are zero.  Throws std::invalid_argument on non-lattice z.
GridField magnetic_translate(const GridField& f, Point2 z, double lambda);

// Bilinear interpolation; returns 0 outside the grid box.
cplx interpolate(const GridField& f, Point2 p);

// Fill a field from a pointwise function fn(Point2) -> value.
template <class F>
GridField sample_field(const Grid2D& g, F&& fn) {
  GridField out(g);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix)
      out.at(ix, iy) = fn(g.point(ix, iy));
  return out;
}

}  // namespace magdwell
