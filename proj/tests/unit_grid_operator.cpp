#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include "magdwell/grid.hpp"
#include "magdwell/kernels.hpp"
#include "magdwell/operator.hpp"
#include "magdwell/params.hpp"
#include "magdwell/potential.hpp"

using namespace magdwell;

namespace {

GridField random_field(const Grid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridField f(g);
  for (auto& v : f.values) v = cplx(u(rng), u(rng));
  return f;
}

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

// Antiunitary mirror: (Tf)(x1, x2) = conj f(x1, -x2).
GridField mirror_conj(const GridField& f) {
  GridField out(f.grid);
  const int n = f.grid.n;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      out.at(ix, iy) = std::conj(f.at(ix, n - 1 - iy));
  return out;
}

// Standard moderate double-well configuration on its production grid, with
// the half-separation snapped to the lattice.
PotentialSpec moderate_spec(const Grid2D& g, WellKind kind, double ybar) {
  ModelParams p;
  p.lambda = 6.0;
  p.D = 2.0;
  p.ybar = ybar;
  DeskOverrides o;
  o.delta = 0.05;
  o.tau = 1e-3;
  DerivedParams dp = derive_parameters(p, o);
  o.d1 = snap_separation(dp.d1, g);
  dp = derive_parameters(p, o);
  return make_potential(p, dp, kind);
}

}  // namespace

TEST_CASE("inner product, norm, and parity basics") {
  Grid2D g3(3, 1.0);  // h = 1
  GridField ones(g3);
  for (auto& v : ones.values) v = cplx(1.0);
  CHECK(inner(ones, ones).real() == doctest::Approx(9.0));
  CHECK(inner(ones, ones).imag() == 0.0);
  CHECK(norm(ones) == doctest::Approx(3.0));

  Grid2D g(41, 2.0);
  const GridField f = random_field(g, 11);
  const GridField h = random_field(g, 12);
  // Cauchy-Schwarz
  CHECK(std::abs(inner(f, h)) <= norm(f) * norm(h) * (1.0 + 1e-12));
  // parity is an involution and an isometry
  const GridField pf = parity(f);
  CHECK(max_abs_diff(parity(pf), f) == 0.0);
  CHECK(norm(pf) == doctest::Approx(norm(f)).epsilon(1e-14));
  // coordinates mirror bitwise
  for (int j = 0; j < g.n; ++j) CHECK(g.coord(g.n - 1 - j) == -g.coord(j));
}

TEST_CASE("free stencil acts correctly on a delta field") {
  Grid2D g(21, 1.0);  // h = 0.1
  const double ih2 = 1.0 / (g.spacing * g.spacing);

  SUBCASE("zero field: plain Laplacian values") {
    const MagneticOperator op = build_operator(g, 0.0);
    GridField f(g);
    f.at(10, 10) = 1.0;
    const GridField y = op.apply(f);
    CHECK(y.at(10, 10) == cplx(4.0 * ih2));
    CHECK(y.at(11, 10) == cplx(-ih2));
    CHECK(y.at(9, 10) == cplx(-ih2));
    CHECK(y.at(10, 11) == cplx(-ih2));
    CHECK(y.at(10, 9) == cplx(-ih2));
    CHECK(y.at(11, 11) == cplx(0.0));
  }

  SUBCASE("magnetic field: exact link phases at an off-center site") {
    const double lambda = 2.5;
    const MagneticOperator op = build_operator(g, lambda);
    GridField f(g);
    const int ix = 13, iy = 7;  // x1 = 0.3, x2 = -0.3
    f.at(ix, iy) = 1.0;
    const GridField y = op.apply(f);
    const double x1 = g.coord(ix), x2 = g.coord(iy);
    // Site x reads its east neighbor with phase e^{+i(l/2)x2 h}; the delta
    // sits at the east neighbor of (ix-1, iy), etc.
    const cplx east = std::polar(1.0, 0.5 * lambda * x2 * g.spacing);
    const cplx north = std::polar(1.0, -0.5 * lambda * x1 * g.spacing);
    CHECK(y.at(ix, iy) == cplx(4.0 * ih2));
    CHECK(std::abs(y.at(ix - 1, iy) - (-ih2 * east)) < 1e-15 * ih2);
    CHECK(std::abs(y.at(ix + 1, iy) - (-ih2 * std::conj(east))) < 1e-15 * ih2);
    CHECK(std::abs(y.at(ix, iy - 1) - (-ih2 * north)) < 1e-15 * ih2);
    CHECK(std::abs(y.at(ix, iy + 1) - (-ih2 * std::conj(north))) < 1e-15 * ih2);
  }
}

TEST_CASE("operator is Hermitian on random fields") {
  Grid2D g(31, 3.0);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> vpot(g.size());
  for (auto& v : vpot) v = u(rng);
  const MagneticOperator op = build_operator(
      g, 3.0, [&](Point2 p) {
        const int ix = static_cast<int>(std::lround(p.x / g.spacing)) + g.center();
        const int iy = static_cast<int>(std::lround(p.y / g.spacing)) + g.center();
        return vpot[g.index(ix, iy)];
      });
  const GridField uf = random_field(g, 21);
  const GridField vf = random_field(g, 22);
  const cplx a = inner(uf, op.apply(vf));
  const cplx b = inner(op.apply(uf), vf);
  CHECK(std::abs(a - b) <=
        1e-12 * norm(uf) * norm(vf) * op.scale_estimate());
}

TEST_CASE("discrete sine modes are exact eigenvectors of the free Laplacian") {
  Grid2D g(25, 1.5);
  const MagneticOperator op = build_operator(g, 0.0);
  const double h = g.spacing;
  for (int p = 1; p <= 3; ++p) {
    const int q = 4 - p;
    GridField f(g);
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix)
        f.at(ix, iy) = std::sin(p * M_PI * (ix + 1) / (g.n + 1)) *
                       std::sin(q * M_PI * (iy + 1) / (g.n + 1));
    const double mu =
        (4.0 - 2.0 * std::cos(p * M_PI / (g.n + 1)) -
         2.0 * std::cos(q * M_PI / (g.n + 1))) /
        (h * h);
    const GridField y = op.apply(f);
    double worst = 0.0;
    for (std::size_t k = 0; k < y.values.size(); ++k)
      worst = std::max(worst, std::abs(y.values[k] - mu * f.values[k]));
    CHECK(worst <= 1e-12 * op.scale_estimate());
  }
}

TEST_CASE("stencil converges to the continuum magnetic operator at second order") {
  const double lambda = 2.0, alpha = 2.0;
  const Point2 a{0.3, -0.2};
  const cplx amp(0.8, 0.6);
  auto f_of = [&](Point2 x) { return amp * std::exp(-alpha * norm2(x - a)); };
  auto hf_of = [&](Point2 x) {
    const double r2 = norm2(x - a);
    const cplx val = f_of(x);
    const cplx fac(4.0 * alpha - 4.0 * alpha * alpha * r2 +
                       0.25 * lambda * lambda * norm2(x),
                   2.0 * alpha * lambda * cross(x, a));
    return fac * val;
  };
  auto err_at = [&](int n) {
    Grid2D g(n, 4.0);
    const MagneticOperator op = build_operator(g, lambda);
    GridField f(g);
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) f.at(ix, iy) = f_of(g.point(ix, iy));
    const GridField y = op.apply(f);
    double worst = 0.0;
    for (int iy = 1; iy + 1 < g.n; ++iy)
      for (int ix = 1; ix + 1 < g.n; ++ix)
        worst = std::max(worst,
                         std::abs(y.at(ix, iy) - hf_of(g.point(ix, iy))));
    return worst;
  };
  const double e1 = err_at(81), e2 = err_at(161);
  CHECK(e1 / e2 > 3.3);
  CHECK(e1 / e2 < 4.7);
}

TEST_CASE("apply twice matches the dense matrix square on a tiny grid") {
  Grid2D g(9, 2.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> vpot(g.size());
  for (auto& v : vpot) v = u(rng);
  const MagneticOperator op = build_operator(
      g, 1.5, [&](Point2 p) {
        const int ix = static_cast<int>(std::lround(p.x / g.spacing)) + g.center();
        const int iy = static_cast<int>(std::lround(p.y / g.spacing)) + g.center();
        return vpot[g.index(ix, iy)];
      });
  const std::size_t nn = g.size();
  // dense assembly from matvecs on basis vectors
  std::vector<std::vector<cplx>> dense(nn, std::vector<cplx>(nn));
  GridField e(g), col(g);
  for (std::size_t c = 0; c < nn; ++c) {
    std::fill(e.values.begin(), e.values.end(), cplx(0.0));
    e.values[c] = 1.0;
    op.apply(e, col);
    for (std::size_t r = 0; r < nn; ++r) dense[r][c] = col.values[r];
  }
  const GridField f = random_field(g, 9);
  const GridField hhf = op.apply(op.apply(f));
  // dense^2 * f
  std::vector<cplx> hf(nn, cplx(0.0)), h2f(nn, cplx(0.0));
  for (std::size_t r = 0; r < nn; ++r)
    for (std::size_t c = 0; c < nn; ++c) hf[r] += dense[r][c] * f.values[c];
  for (std::size_t r = 0; r < nn; ++r)
    for (std::size_t c = 0; c < nn; ++c) h2f[r] += dense[r][c] * hf[c];
  const double s2 = op.scale_estimate() * op.scale_estimate();
  for (std::size_t k = 0; k < nn; ++k)
    CHECK(std::abs(hhf.values[k] - h2f[k]) <= 1e-13 * s2);
}

TEST_CASE("Zak translation commutes with the free operator at rounding level") {
  Grid2D g(81, 4.0);  // h = 0.1
  const double lambda = 2.0;
  const MagneticOperator op = build_operator(g, lambda);
  const Point2 a{-0.3, 0.1};
  GridField f(g);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix)
      f.at(ix, iy) = cplx(1.0, 0.4) * std::exp(-4.0 * norm2(g.point(ix, iy) - a));
  const Point2 z{0.5, -0.3};  // 5 and -3 cells

  SUBCASE("identity and isometry") {
    CHECK(max_abs_diff(magnetic_translate(f, {0, 0}, lambda), f) == 0.0);
    const GridField tf = magnetic_translate(f, z, lambda);
    CHECK(norm(tf) == doctest::Approx(norm(f)).epsilon(1e-12));
    CHECK_THROWS_AS(magnetic_translate(f, {0.5 * g.spacing, 0.0}, lambda),
                    std::invalid_argument);
  }

  SUBCASE("commutation with the free Hamiltonian") {
    const GridField lhs = op.apply(magnetic_translate(f, z, lambda));
    const GridField rhs = magnetic_translate(op.apply(f), z, lambda);
    // Exact in exact arithmetic for lattice shifts; rounding only.
    CHECK(max_abs_diff(lhs, rhs) <= 1e-13 * op.scale_estimate() * norm(f));
  }
}

TEST_CASE("structured diagonal: pasting, alignment, and symmetry") {
  Grid2D g(241, 9.0);  // standard production grid, h = 0.075

  SUBCASE("snap lands on even lattice multiples") {
    const double snapped = snap_separation(std::sqrt(2.0), g);
    CHECK(snapped == 18.0 * g.spacing);
    CHECK(snap_separation(2.0 * g.spacing, g) == 2.0 * g.spacing);
    CHECK(snap_separation(1e-9, g) == 2.0 * g.spacing);  // floor at one pair
    CHECK_THROWS_AS(snap_separation(0.0, g), std::invalid_argument);
  }

  SUBCASE("misaligned separations are rejected") {
    PotentialSpec spec = moderate_spec(g, WellKind::double_well, 0.3);
    spec.derived.d1 = 19.0 * g.spacing;  // odd multiple
    CHECK_THROWS_AS(potential_diagonal(spec, g), std::invalid_argument);
    spec.derived.d1 = 18.37 * g.spacing;  // not a multiple
    CHECK_THROWS_AS(potential_diagonal(spec, g), std::invalid_argument);
  }

  SUBCASE("planet-only pasting matches pointwise evaluation") {
    PotentialSpec spec = moderate_spec(g, WellKind::left, 0.3);
    spec.derived.tau = 0.0;  // sophons off: pointwise sampling is exact
    const std::vector<double> dia = potential_diagonal(spec, g);
    double worst = 0.0;
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix)
        worst = std::max(worst,
                         std::abs(dia[g.index(ix, iy)] -
                                  eval_potential(spec, g.point(ix, iy))));
    CHECK(worst <= 1e-12 * spec.params.lambda * spec.params.lambda);
  }

  SUBCASE("double-well diagonal is bitwise parity-even and mirror-even") {
    const PotentialSpec spec = moderate_spec(g, WellKind::double_well, 0.3);
    const std::vector<double> dia = potential_diagonal(spec, g);
    const int n = g.n;
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        CHECK(dia[g.index(ix, iy)] ==
              dia[g.index(n - 1 - ix, n - 1 - iy)]);
        CHECK(dia[g.index(ix, iy)] == dia[g.index(ix, n - 1 - iy)]);
      }
  }

  SUBCASE("sophon cell averages carry the full bump mass") {
    const PotentialSpec spec = moderate_spec(g, WellKind::single_centered, 0.3);
    PotentialSpec planet_only = spec;
    planet_only.derived.tau = 0.0;
    const std::vector<double> full = potential_diagonal(spec, g);
    const std::vector<double> base = potential_diagonal(planet_only, g);
    double mass = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k) mass += full[k] - base[k];
    mass *= g.spacing * g.spacing;
    const double delta = spec.sophon.radius;
    const double expected =
        -4.0 * spec.derived.tau * spec.sophon.mean_abs * M_PI * delta * delta;
    CHECK(mass == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("double-well operator commutes bitwise with parity and mirror") {
  Grid2D g(241, 9.0);
  const PotentialSpec spec = moderate_spec(g, WellKind::double_well, 0.3);
  const MagneticOperator op = build_operator(spec, g);
  CHECK(op.parity_symmetric);
  CHECK(op.mirror_symmetric);
  const GridField f = random_field(g, 31);

  const GridField p_lhs = op.apply(parity(f));
  const GridField p_rhs = parity(op.apply(f));
  CHECK(max_abs_diff(p_lhs, p_rhs) == 0.0);

  const GridField t_lhs = op.apply(mirror_conj(f));
  const GridField t_rhs = mirror_conj(op.apply(f));
  CHECK(max_abs_diff(t_lhs, t_rhs) == 0.0);
}

TEST_CASE("gauge phases off yields the real well operator") {
  Grid2D g(121, 9.0);
  PotentialSpec spec;
  {
    ModelParams p;
    p.lambda = 6.0;
    p.D = 2.0;
    p.ybar = 0.3;
    DeskOverrides o;
    o.delta = 0.05;
    o.tau = 1e-3;
    DerivedParams dp = derive_parameters(p, o);
    o.d1 = snap_separation(dp.d1, g);
    dp = derive_parameters(p, o);
    spec = make_potential(p, dp, WellKind::double_well);
  }
  const MagneticOperator op = build_operator(spec, g, GaugePhases::off);
  for (const cplx& ph : op.hop_row) CHECK(ph == cplx(1.0));
  for (const cplx& ph : op.hop_col) CHECK(ph == cplx(1.0));
  GridField f(g);
  for (int iy = 0; iy < g.n; ++iy)
    for (int ix = 0; ix < g.n; ++ix)
      f.at(ix, iy) = std::exp(-norm2(g.point(ix, iy)));
  const GridField y = op.apply(f);
  for (const cplx& v : y.values) CHECK(v.imag() == 0.0);
}

TEST_CASE("resolvent kernel samples satisfy the discrete equation at second order") {
  // (H - z) K = 0 away from the source for H = -Lap + omega^2 r^2/4; the
  // discrete residual on kernel samples must shrink at the stencil order.
  const double omega = 2.0, z = -1.0;
  std::map<double, double> cache;  // keyed on r^2, 8-fold symmetric bitwise
  auto kval = [&](double r2) {
    auto it = cache.find(r2);
    if (it != cache.end()) return it->second;
    const double v =
        sho_resolvent_kernel(KernelQuery{omega, z, {std::sqrt(r2), 0.0}});
    cache.emplace(r2, v);
    return v;
  };
  auto rel_residual = [&](int n) {
    Grid2D g(n, 4.0);
    const MagneticOperator op = build_operator(
        g, 0.0, [&](Point2 p) { return 0.25 * omega * omega * norm2(p); });
    GridField f(g);
    const double lo = 1.5 - 3.5 * g.spacing, hi = 3.0 + 3.5 * g.spacing;
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) {
        const double r2 = norm2(g.point(ix, iy));
        if (r2 >= lo * lo && r2 <= hi * hi) f.at(ix, iy) = kval(r2);
      }
    const GridField y = op.apply(f);
    double worst = 0.0;
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) {
        const double r2 = norm2(g.point(ix, iy));
        if (r2 < 1.5 * 1.5 || r2 > 3.0 * 3.0) continue;
        const double res =
            std::abs(y.at(ix, iy) - z * f.at(ix, iy)) / kval(r2);
        worst = std::max(worst, res);
      }
    return worst;
  };
  const double e1 = rel_residual(161), e2 = rel_residual(321);
  CHECK(e1 / e2 > 3.0);
  CHECK(e1 / e2 < 5.5);
}
