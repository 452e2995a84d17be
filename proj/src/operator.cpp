#include "magdwell/operator.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

#include "magdwell/quadrature.hpp"

namespace magdwell {

namespace {

// Phase array exp(i * sign * (lambda/2) * coord(j) * h), written so that
// ph[n-1-j] == conj(ph[j]) holds bitwise: the upper half is computed and the
// lower half mirror-assigned (coord(n-1-j) == -coord(j) exactly).
std::vector<cplx> link_phases(const Grid2D& g, double lambda, double sign) {
  std::vector<cplx> ph(static_cast<std::size_t>(g.n), cplx(1.0));
  for (int j = g.center(); j < g.n; ++j) {
    const double theta = sign * 0.5 * lambda * g.coord(j) * g.spacing;
    ph[static_cast<std::size_t>(j)] = std::polar(1.0, theta);
    ph[static_cast<std::size_t>(g.n - 1 - j)] =
        std::conj(ph[static_cast<std::size_t>(j)]);
  }
  return ph;
}

MagneticOperator assemble(const Grid2D& g, double lambda, GaugePhases gauge,
                          std::vector<double> potential_values,
                          bool parity_sym, bool mirror_sym) {
  MagneticOperator op;
  op.grid = g;
  op.lambda = lambda;
  op.gauge = gauge;
  op.diag = std::move(potential_values);
  const double kinetic = 4.0 / (g.spacing * g.spacing);
  for (double& d : op.diag) d += kinetic;
  if (gauge == GaugePhases::on && lambda != 0.0) {
    op.hop_row = link_phases(g, lambda, +1.0);
    op.hop_col = link_phases(g, lambda, -1.0);
  } else {
    op.hop_row.assign(static_cast<std::size_t>(g.n), cplx(1.0));
    op.hop_col.assign(static_cast<std::size_t>(g.n), cplx(1.0));
  }
  op.parity_symmetric = parity_sym;
  op.mirror_symmetric = mirror_sym;
  return op;
}

// Cell averages of one sophon bump: value[c] = (1/h^2) int_cell tau*W0(x - z)
// over every grid cell meeting the disc, by a fixed Gauss-Legendre rule.
struct CellPatch {
  int i0 = 0, i1 = -1, j0 = 0, j1 = -1;  // inclusive cell-index window
  std::vector<double> v;

  double at(int i, int j) const {
    if (i < i0 || i > i1 || j < j0 || j > j1) return 0.0;
    return v[static_cast<std::size_t>(j - j0) * (i1 - i0 + 1) + (i - i0)];
  }
};

CellPatch cell_average_disc(const PotentialSpec& spec, const Grid2D& g,
                            Point2 zeta) {
  const double h = g.spacing;
  const double rad = spec.sophon.radius;
  const int m = g.center();
  const double pad = 1e-9;
  CellPatch p;
  p.i0 = std::max(0, static_cast<int>(std::ceil(m + (zeta.x - rad) / h - 0.5 - pad)));
  p.i1 = std::min(g.n - 1, static_cast<int>(std::floor(m + (zeta.x + rad) / h + 0.5 + pad)));
  p.j0 = std::max(0, static_cast<int>(std::ceil(m + (zeta.y - rad) / h - 0.5 - pad)));
  p.j1 = std::min(g.n - 1, static_cast<int>(std::floor(m + (zeta.y + rad) / h + 0.5 + pad)));
  if (p.i0 > p.i1 || p.j0 > p.j1) return p;
  p.v.assign(static_cast<std::size_t>(p.i1 - p.i0 + 1) * (p.j1 - p.j0 + 1), 0.0);

  const GaussRule& rule = gauss_legendre(16);
  const double tau = spec.derived.tau;
  for (int j = p.j0; j <= p.j1; ++j) {
    for (int i = p.i0; i <= p.i1; ++i) {
      const Point2 c = g.point(i, j);
      double acc = 0.0;
      for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
        const double y = c.y + 0.5 * h * rule.nodes[b];
        double row = 0.0;
        for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
          const double x = c.x + 0.5 * h * rule.nodes[a];
          row += rule.weights[a] *
                 eval_sophon(spec.sophon, Point2{x, y} - zeta);
        }
        acc += rule.weights[b] * row;
      }
      // (1/h^2) * (h/2)^2 * sum = sum/4.
      p.v[static_cast<std::size_t>(j - p.j0) * (p.i1 - p.i0 + 1) + (i - p.i0)] =
          0.25 * tau * acc;
    }
  }
  return p;
}

// Add the grouped symmetry images of a representative patch.  With
// four_fold, every target cell receives
//     (A(i,j) + A(i,mj)) + (A(mi,mj) + A(mi,j)),
// a sum whose value is bitwise invariant under j <-> mj (inner pairs commute)
// and under (i,j) <-> (mi,mj) (outer pair commutes); with mirror_only it
// receives A(i,j) + A(i,mj).  Each target cell is visited exactly once even
// when image windows overlap.
void add_patch_images(const Grid2D& g, const CellPatch& p, bool four_fold,
                      std::vector<double>& out) {
  if (p.v.empty()) return;
  const int n = g.n;
  std::set<std::pair<int, int>> targets;
  auto add_window = [&](int a0, int a1, int b0, int b1) {
    for (int j = b0; j <= b1; ++j)
      for (int i = a0; i <= a1; ++i) targets.insert({i, j});
  };
  add_window(p.i0, p.i1, p.j0, p.j1);
  add_window(p.i0, p.i1, n - 1 - p.j1, n - 1 - p.j0);
  if (four_fold) {
    add_window(n - 1 - p.i1, n - 1 - p.i0, n - 1 - p.j1, n - 1 - p.j0);
    add_window(n - 1 - p.i1, n - 1 - p.i0, p.j0, p.j1);
  }
  for (const auto& [i, j] : targets) {
    const int mi = n - 1 - i, mj = n - 1 - j;
    double tv = p.at(i, j) + p.at(i, mj);
    if (four_fold) tv = tv + (p.at(mi, mj) + p.at(mi, j));
    out[g.index(i, j)] += tv;
  }
}

void add_patch_raw(const Grid2D& g, const CellPatch& p,
                   std::vector<double>& out) {
  if (p.v.empty()) return;
  for (int j = p.j0; j <= p.j1; ++j)
    for (int i = p.i0; i <= p.i1; ++i) out[g.index(i, j)] += p.at(i, j);
}

// Origin-centered single-well samples: pointwise planet plus cell-averaged
// sophons, with image copying whenever the live center set is closed under
// the x2 mirror (2 centers) or the full reflection group (4 centers).
std::vector<double> single_well_array(const PotentialSpec& spec,
                                      const Grid2D& g) {
  std::vector<double> sw(g.size(), 0.0);
  const double l2 = spec.params.lambda * spec.params.lambda;
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix)
      sw[g.index(ix, iy)] = l2 * eval_planet(spec.planet, g.point(ix, iy));

  const auto& centers = spec.derived.centers;
  if (!centers.empty() && spec.derived.tau != 0.0) {
    if (centers.size() == 4 || centers.size() == 2) {
      const CellPatch rep = cell_average_disc(spec, g, centers[0]);
      add_patch_images(g, rep, centers.size() == 4, sw);
    } else {
      for (const Point2& z : centers)
        add_patch_raw(g, cell_average_disc(spec, g, z), sw);
    }
  }
  return sw;
}

int lattice_shift_cells(const PotentialSpec& spec, const Grid2D& g) {
  const double kd_real = spec.derived.d1 / g.spacing;
  const long kd = std::lround(kd_real);
  const bool aligned =
      std::abs(kd_real - static_cast<double>(kd)) <=
      1e-9 * std::max(1.0, std::abs(kd_real));
  if (!aligned || kd <= 0 || kd % 2 != 0)
    throw std::invalid_argument(
        "lattice misalignment: well half-separation d1 must be a positive "
        "even integer multiple of the grid spacing (snap_separation first)");
  return static_cast<int>(kd);
}

}  // namespace

void MagneticOperator::apply_raw(const cplx* in, cplx* out) const {
  const int n = grid.n;
  const double ih2 = 1.0 / (grid.spacing * grid.spacing);
  for (int iy = 0; iy < n; ++iy) {
    const cplx pe = hop_row[static_cast<std::size_t>(iy)];
    const cplx pw = std::conj(pe);
    const std::size_t row = static_cast<std::size_t>(iy) * n;
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t k = row + ix;
      // Grouped east+west and north+south sums: the grouping (not just the
      // phase structure) is what makes parity/mirror commutation exact in
      // floating point, so do not reassociate.
      cplx gx(0.0), gy(0.0);
      {
        cplx e(0.0), w(0.0);
        if (ix + 1 < n) e = pe * in[k + 1];
        if (ix > 0) w = pw * in[k - 1];
        gx = e + w;
      }
      {
        const cplx pn = hop_col[static_cast<std::size_t>(ix)];
        cplx nb(0.0), sb(0.0);
        if (iy + 1 < n) nb = pn * in[k + n];
        if (iy > 0) sb = std::conj(pn) * in[k - n];
        gy = nb + sb;
      }
      out[k] = diag[k] * in[k] - ih2 * (gx + gy);
    }
  }
}

void MagneticOperator::apply(const GridField& in, GridField& out) const {
  if (!in.grid.same_as(grid) || !out.grid.same_as(grid))
    throw std::invalid_argument("apply: field grid mismatch");
  if (&in == &out || in.values.data() == out.values.data())
    throw std::invalid_argument("apply: input and output must not alias");
  apply_raw(in.values.data(), out.values.data());
}

GridField MagneticOperator::apply(const GridField& in) const {
  GridField out(grid);
  apply(in, out);
  return out;
}

double MagneticOperator::scale_estimate() const {
  double m = 0.0;
  for (double d : diag) m = std::max(m, std::abs(d));
  return m + 4.0 / (grid.spacing * grid.spacing);
}

MagneticOperator build_operator(const Grid2D& grid, double lambda,
                                GaugePhases gauge) {
  return assemble(grid, lambda, gauge, std::vector<double>(grid.size(), 0.0),
                  /*parity_sym=*/true, /*mirror_sym=*/true);
}

MagneticOperator build_operator(const Grid2D& grid, double lambda,
                                const std::function<double(Point2)>& potential,
                                GaugePhases gauge) {
  if (!potential) return build_operator(grid, lambda, gauge);
  std::vector<double> v(grid.size(), 0.0);
  for (int iy = 0; iy < grid.n; ++iy)
    for (int ix = 0; ix < grid.n; ++ix)
      v[grid.index(ix, iy)] = potential(grid.point(ix, iy));
  // No symmetry certificate for arbitrary closures, even mathematically
  // symmetric ones: the samples were not built with mirrored rounding.
  return assemble(grid, lambda, gauge, std::move(v),
                  /*parity_sym=*/false, /*mirror_sym=*/false);
}

std::vector<double> potential_diagonal(const PotentialSpec& spec,
                                       const Grid2D& grid) {
  const std::vector<double> sw = single_well_array(spec, grid);
  if (spec.kind == WellKind::single_centered) return sw;

  const int n = grid.n;
  const int kd = lattice_shift_cells(spec, grid);
  auto sw_at = [&](int i, int j) -> double {
    return (i >= 0 && i < n) ? sw[grid.index(i, j)] : 0.0;
  };
  std::vector<double> out(grid.size(), 0.0);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      double v = 0.0;
      switch (spec.kind) {
        case WellKind::left:
          v = sw_at(ix + kd, iy);
          break;
        case WellKind::right:
          v = sw_at(n - 1 - ix + kd, n - 1 - iy);
          break;
        case WellKind::double_well:
          v = sw_at(ix + kd, iy) + sw_at(n - 1 - ix + kd, n - 1 - iy);
          break;
        case WellKind::single_centered:
          break;  // handled above
      }
      out[grid.index(ix, iy)] = v;
    }
  }
  return out;
}

MagneticOperator build_operator(const PotentialSpec& spec, const Grid2D& grid,
                                GaugePhases gauge) {
  std::vector<double> v = potential_diagonal(spec, grid);
  const std::size_t nu = spec.derived.centers.size();
  const bool sophons_mirrored = nu == 0 || nu == 2 || nu == 4;
  const bool sophons_inversion = nu == 0 || nu == 4;
  bool parity_sym = false;
  switch (spec.kind) {
    case WellKind::single_centered:
      parity_sym = sophons_inversion;
      break;
    case WellKind::double_well:
      parity_sym = true;  // exact by reflected pasting, any sophon layout
      break;
    case WellKind::left:
    case WellKind::right:
      parity_sym = false;
      break;
  }
  return assemble(grid, spec.params.lambda, gauge, std::move(v), parity_sym,
                  sophons_mirrored);
}

double snap_separation(double d1, const Grid2D& grid) {
  if (!(d1 > 0.0))
    throw std::invalid_argument("snap_separation: d1 must be positive");
  const long k2 = std::lround(d1 / (2.0 * grid.spacing));
  const long k = 2 * std::max(1L, k2);
  return static_cast<double>(k) * grid.spacing;
}

}  // namespace magdwell
