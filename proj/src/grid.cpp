#include "magdwell/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace magdwell {

Grid2D::Grid2D(int n_points, double L) : n(n_points), half_width(L) {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("grid size must be odd and at least 3");
  if (!(L > 0.0)) throw std::invalid_argument("grid half-width must be positive");
  spacing = 2.0 * L / (n - 1);
}

bool Grid2D::same_as(const Grid2D& o) const {
  return n == o.n && half_width == o.half_width;
}

cplx inner(const GridField& f, const GridField& g) {
  if (!f.grid.same_as(g.grid)) throw std::invalid_argument("grid mismatch");
  cplx acc(0.0);
  const std::size_t m = f.values.size();
  for (std::size_t i = 0; i < m; ++i) acc += std::conj(f.values[i]) * g.values[i];
  const double h = f.grid.spacing;
  return h * h * acc;
}

double norm(const GridField& f) {
  double acc = 0.0;
  for (const cplx& v : f.values) acc += std::norm(v);
  return f.grid.spacing * std::sqrt(acc);
}

GridField parity(const GridField& f) {
  const int n = f.grid.n;
  GridField out(f.grid);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      out.at(ix, iy) = f.at(n - 1 - ix, n - 1 - iy);
  return out;
}

GridField mirror_conjugate(const GridField& f) {
  const int n = f.grid.n;
  GridField out(f.grid);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      out.at(ix, iy) = std::conj(f.at(ix, n - 1 - iy));
  return out;
}

GridField magnetic_translate(const GridField& f, Point2 z, double lambda) {
  const Grid2D& g = f.grid;
  const double h = g.spacing;
  const double kx_real = z.x / h;
  const double ky_real = z.y / h;
  const long kx = std::lround(kx_real);
  const long ky = std::lround(ky_real);
  if (std::abs(kx_real - kx) > 1e-9 || std::abs(ky_real - ky) > 1e-9)
    throw std::invalid_argument(
        "magnetic_translate: shift is not an integer multiple of the grid spacing");

  GridField out(g);
  // Phase exponent: (lambda/2) x.z_perp with z_perp = (-z2, z1), i.e.
  // (lambda/2)(x2 z1 - x1 z2).
  const double half_l = 0.5 * lambda;
  for (int iy = 0; iy < g.n; ++iy) {
    const double x2 = g.coord(iy);
    for (int ix = 0; ix < g.n; ++ix) {
      const long sx = ix - kx;
      const long sy = iy - ky;
      if (sx < 0 || sx >= g.n || sy < 0 || sy >= g.n) continue;
      const double x1 = g.coord(ix);
      const double theta = half_l * (x2 * z.x - x1 * z.y);
      out.at(ix, iy) = std::polar(1.0, theta) * f.at(int(sx), int(sy));
    }
  }
  return out;
}

cplx interpolate(const GridField& f, Point2 p) {
  const Grid2D& g = f.grid;
  const double h = g.spacing;
  const double fx = p.x / h + g.center();
  const double fy = p.y / h + g.center();
  if (fx < 0.0 || fy < 0.0 || fx > g.n - 1 || fy > g.n - 1) return cplx(0.0);
  int ix = static_cast<int>(fx);
  int iy = static_cast<int>(fy);
  if (ix >= g.n - 1) ix = g.n - 2;
  if (iy >= g.n - 1) iy = g.n - 2;
  const double tx = fx - ix;
  const double ty = fy - iy;
  return (1 - tx) * (1 - ty) * f.at(ix, iy) + tx * (1 - ty) * f.at(ix + 1, iy) +
         (1 - tx) * ty * f.at(ix, iy + 1) + tx * ty * f.at(ix + 1, iy + 1);
}

}  // namespace magdwell
