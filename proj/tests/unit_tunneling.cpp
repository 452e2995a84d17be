#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "magdwell/tunneling.hpp"

using namespace magdwell;

namespace {

// Workhorse configuration: strong enough field for well-localized states,
// coarse enough grid to keep every solve below a second.  d1 = 2^{3/2}/2
// snaps to 1.5 = 10h, so the sign-structure frequency lambda*d1 is exactly 6.
SystemConfig config_a(GaugePhases gauge = GaugePhases::on) {
  SystemConfig c;
  c.params.lambda = 4.0;
  c.params.D = 2.0;
  c.params.ybar = 0.1;
  c.params.nu_max = 4;
  c.overrides.delta = 0.15;
  c.overrides.tau = 1e-3;
  c.gauge = gauge;
  return c;
}

const Grid2D& grid_a() {
  static Grid2D g(87, 6.45);  // h = 0.15
  return g;
}

SolveRequest fast_request() {
  SolveRequest r;
  r.k = 2;
  return r;
}

const ResolvedSystem& sys_a() {
  static ResolvedSystem s = resolve_system(config_a(), grid_a());
  return s;
}

const WellStates& ws_a() {
  static WellStates w = single_well_ground(sys_a().single_spec, grid_a(), fast_request());
  return w;
}

const TunnelingReport& rep_a() {
  static TunnelingReport r = [] {
    SolveRequest rq = fast_request();
    rq.with_operator_form = true;
    return double_well_report(sys_a(), rq, &ws_a());
  }();
  return r;
}

// Wider separation (D = 2.4) so every cross-well support pair is disjoint;
// used for the interaction-table checks.
SystemConfig config_b() {
  SystemConfig c = config_a();
  c.params.D = 2.4;
  return c;
}

const Grid2D& grid_b() {
  static Grid2D g(99, 7.35);  // h = 0.15
  return g;
}

// Sophon-dominant variant: deeper sophons at the wider separation put the
// oscillating cross-well channel well above the direct planet-planet channel
// (measured ~10x at the cos extremes), so S(ybar) genuinely changes sign on
// this grid.  Used by the sweep and degeneracy-search tests.
SystemConfig config_sweep() {
  SystemConfig c = config_b();
  c.overrides.tau = 1.8;
  return c;
}

const ResolvedSystem& sys_b() {
  static ResolvedSystem s = resolve_system(config_b(), grid_b());
  return s;
}

const WellStates& ws_b() {
  static WellStates w = single_well_ground(sys_b().single_spec, grid_b(), fast_request());
  return w;
}

const GammaEstimate& gamma_b() {
  static GammaEstimate g = gamma_constant(ws_b().phi0, config_b().params.lambda,
                                          ws_b().e0, {1.5, 0.0}, {}, 1.0);
  return g;
}

const OmegaTable& omega_b() {
  static OmegaTable t = omega_table(sys_b(), ws_b(), gamma_b());
  return t;
}

bool bitwise_equal(const GridField& a, const GridField& b) {
  if (a.values.size() != b.values.size()) return false;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (a.values[i] != b.values[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("resolve_system snaps the separation onto the even sublattice") {
  const ResolvedSystem& sys = sys_a();
  const double h = grid_a().spacing;
  CHECK(sys.derived.d1 == doctest::Approx(1.5).epsilon(1e-14));
  const double steps = sys.derived.d1 / h;
  CHECK(std::abs(steps - std::round(steps)) < 1e-9);
  CHECK(static_cast<long long>(std::llround(steps)) % 2 == 0);
  CHECK(sys.derived.moderate_regime);  // overrides active
  CHECK(sys.single_spec.kind == WellKind::single_centered);
  CHECK(sys.dw_spec.kind == WellKind::double_well);

  // Re-resolving with the snapped value is a fixed point.
  SystemConfig pinned = config_a();
  pinned.overrides.d1 = sys.derived.d1;
  const ResolvedSystem again = resolve_system(pinned, grid_a());
  CHECK(again.derived.d1 == sys.derived.d1);
}

TEST_CASE("single-well ground states: energies, symmetry, radiality") {
  const WellStates& ws = ws_a();
  CHECK(ws.converged);
  CHECK(norm(ws.phi) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(norm(ws.phi0) == doctest::Approx(1.0).epsilon(1e-10));

  // Bound well below the first magnetic level.
  CHECK(ws.e0 < 0.0);
  CHECK(ws.e0 > -16.0);  // deeper than the well floor -lambda^2 is impossible
  // The sophon decoration is attractive and tiny: e in [e0 - tau, e0].
  CHECK(ws.e <= ws.e0 + 1e-14);
  CHECK(ws.e >= ws.e0 - 1e-3);
  CHECK(ws.gap_estimate > 1.0);

  // The mirror/inversion symmetrization is exact by construction.
  CHECK(bitwise_equal(ws.phi, mirror_conjugate(ws.phi)));
  CHECK(bitwise_equal(ws.phi, parity(ws.phi)));
  CHECK(bitwise_equal(ws.phi0, mirror_conjugate(ws.phi0)));
  CHECK(bitwise_equal(ws.phi0, parity(ws.phi0)));

  // Radiality of the reference state at grid-exact angles.
  CHECK(ws.radial_variance < 1e-8);
  CHECK(ws.radial_ok);

  CHECK(ws.solver_cache.size() == 3);
  CHECK(ws.gauge == GaugePhases::on);
}

TEST_CASE("radial donor is reused verbatim and only the decorated solve reruns") {
  const WellStates& donor = ws_a();
  const WellStates ws = single_well_ground(sys_a().single_spec, grid_a(),
                                           fast_request(), &donor);
  CHECK(ws.e0 == donor.e0);
  CHECK(bitwise_equal(ws.phi0, donor.phi0));
  CHECK(std::abs(ws.e - donor.e) < 1e-10);
  CHECK(ws.iterations < donor.iterations);  // warm start, no radial solve

  // A donor solved under the other gauge must be rejected.
  SolveRequest off = fast_request();
  off.gauge = GaugePhases::off;
  CHECK_THROWS_AS(single_well_ground(sys_a().single_spec, grid_a(), off, &donor),
                  std::invalid_argument);
}

TEST_CASE("single_well_ground rejects non-centered specs") {
  CHECK_THROWS_AS(single_well_ground(sys_a().dw_spec, grid_a(), fast_request()),
                  std::invalid_argument);
}

TEST_CASE("orbitals: exact inversion pairing and decaying overlap") {
  const WellStates& ws = ws_a();
  const double lam = config_a().params.lambda;
  const OrbitalPair pair = build_orbitals(ws, sys_a().derived.d(), lam, grid_a());

  CHECK(bitwise_equal(pair.phiR, parity(pair.phiL)));
  CHECK(norm(pair.phiL) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(norm(pair.phiR) == doctest::Approx(1.0).epsilon(1e-9));

  // <phiL, phiR> is real positive at this configuration and shrinks as the
  // wells separate.
  CHECK(std::abs(pair.overlap.imag()) < 1e-12);
  CHECK(pair.overlap.real() > 0.0);
  const double h = grid_a().spacing;
  double prev = std::abs(pair.overlap);
  for (int steps : {12, 14}) {
    const OrbitalPair wider =
        build_orbitals(ws, {steps * h, 0.0}, lam, grid_a());
    CHECK(std::abs(wider.overlap) < prev);
    prev = std::abs(wider.overlap);
  }

  // Off-lattice and mismatched-grid requests are rejected.
  CHECK_THROWS_AS(build_orbitals(ws, {1.5 + 0.3 * h, 0.0}, lam, grid_a()),
                  std::invalid_argument);
  const Grid2D other(31, 3.0);
  CHECK_THROWS_AS(build_orbitals(ws, {1.5, 0.0}, lam, other),
                  std::invalid_argument);
}

TEST_CASE("hopping coefficient: reality, form agreement, operator cross-check") {
  const TunnelingReport& rep = rep_a();
  const double mag = std::abs(rep.rho);
  CHECK(mag > 1e-6);  // the wells genuinely talk to each other here
  CHECK(std::abs(rep.rho.imag()) < 1e-10 * mag);
  CHECK(rep.rho_form_gap < 1e-10 * mag);

  REQUIRE(rep.rho_operator_form.has_value());
  CHECK(std::abs(*rep.rho_operator_form - rep.rho) < 1e-9);

  // Re-derive both forms directly to pin the orientation: rho pairs the
  // right-well potential with the orbitals, rho_alt the left-well potential.
  const OrbitalPair pair =
      build_orbitals(ws_a(), sys_a().derived.d(), config_a().params.lambda, grid_a());
  const HoppingResult hop = hopping(pair, sys_a().dw_spec, grid_a());
  // The report re-ran the decorated solve (warm-started from the donor), so
  // its state matches the donor's to solver precision rather than bitwise.
  CHECK(std::abs(hop.rho - rep.rho) < 1e-9 * mag);
  CHECK(std::abs(hop.rho - hop.rho_alt) == hop.form_gap);

  PotentialSpec bad = sys_a().single_spec;
  CHECK_THROWS_AS(hopping(pair, bad, grid_a()), std::invalid_argument);
}

TEST_CASE("two-level estimate matches the sector splitting") {
  const TunnelingReport& rep = rep_a();
  CHECK_FALSE(rep.lcao_degenerate);
  // Leading order S ~ -2 Re rho; the overlap corrections at this separation
  // are ~2e-5 relative (measured 6e-6).
  CHECK(rep.rho_lcao_S == doctest::Approx(rep.S).epsilon(1e-3));
  CHECK(-2.0 * rep.rho.real() == doctest::Approx(rep.S).epsilon(1e-3));
  CHECK(rep.lcao_diag_correction < 0.0);  // attractive cross terms

  const OrbitalPair pair =
      build_orbitals(ws_a(), sys_a().derived.d(), config_a().params.lambda, grid_a());
  const HoppingResult hop = hopping(pair, sys_a().dw_spec, grid_a());
  const LcaoEstimate est = lcao_estimate(pair, sys_a().dw_spec, grid_a(), hop);
  CHECK(est.minus_two_rho == -2.0 * hop.rho.real());
  // ||L+R||^2 + ||L-R||^2 = 2||L||^2 + 2||R||^2 and
  // ||L+R||^2 - ||L-R||^2 = 4 Re <L,R>.
  const double nl = norm(pair.phiL), nr = norm(pair.phiR);
  CHECK(est.denom_even + est.denom_odd ==
        doctest::Approx(2.0 * (nl * nl + nr * nr)).epsilon(1e-12));
  CHECK(est.denom_even - est.denom_odd ==
        doctest::Approx(4.0 * pair.overlap.real()).epsilon(1e-9));
  CHECK(est.S_lcao == doctest::Approx(est.odd_shift - est.even_shift).epsilon(1e-14));
}

TEST_CASE("full report: splitting equals the spectral gap, parity is sharp") {
  const TunnelingReport& rep = rep_a();
  CHECK(rep.solver_converged);
  CHECK(rep.radial_ok);
  CHECK(rep.gauge_on);
  CHECK(rep.d1 == doctest::Approx(1.5).epsilon(1e-14));

  const double bar = 2.0 * 1e-10 * std::abs(rep.e_lambda);
  CHECK(std::abs(rep.Delta - std::abs(rep.S)) < bar);
  // {E0, E1} = {E_even, E_odd} as sets.
  const double lo = std::min(rep.E_even, rep.E_odd);
  const double hi = std::max(rep.E_even, rep.E_odd);
  CHECK(std::abs(rep.E0 - lo) < bar);
  CHECK(std::abs(rep.E1 - hi) < bar);
  CHECK(rep.Delta >= 0.0);

  // cos(6 * 0.1) > 0: magnetic hopping keeps the classical sign here, the
  // ground state is even, and the splitting is positive.
  CHECK(rep.S > 0.0);
  CHECK(rep.rho.real() < 0.0);
  CHECK(rep.parity0 > 0.9999);

  CHECK(rep.predicted_cos ==
        doctest::Approx(std::cos(0.5 * 4.0 * std::pow(2.0, 1.5) * 0.1))
            .epsilon(1e-15));
  CHECK(rep.e_lambda < 0.0);
  CHECK(rep.e0_lambda < 0.0);
  CHECK(rep.overlap.real() > 0.0);
  CHECK(rep.total_iterations > 0);

  SolveRequest small = fast_request();
  small.k = 1;
  CHECK_THROWS_AS(double_well_report(sys_a(), small, &ws_a()),
                  std::invalid_argument);
}

TEST_CASE("gauge off reverts to the classical sign-definite regime") {
  SystemConfig cfg = config_a(GaugePhases::off);
  const ResolvedSystem sys = resolve_system(cfg, grid_a());
  SolveRequest req = fast_request();
  req.gauge = GaugePhases::off;
  const WellStates ws = single_well_ground(sys.single_spec, grid_a(), req);
  CHECK(ws.gauge == GaugePhases::off);
  const TunnelingReport rep = double_well_report(sys, req, &ws);

  CHECK_FALSE(rep.gauge_on);
  CHECK(rep.rho.real() < 0.0);
  CHECK(std::abs(rep.rho.imag()) < 1e-12);
  CHECK(rep.S > 0.0);  // even state strictly below odd, always
  CHECK(rep.E_even < rep.E_odd);
  CHECK(rep.parity0 > 0.9999);
}

TEST_CASE("sophon displacement ybar = 0 is a regular configuration") {
  SystemConfig cfg = config_a();
  cfg.params.ybar = 0.0;
  const ResolvedSystem sys = resolve_system(cfg, grid_a());
  const TunnelingReport rep = double_well_report(sys, fast_request(), &ws_a());
  CHECK(rep.solver_converged);
  CHECK(std::isfinite(rep.S));
  CHECK(std::isfinite(rep.Delta));
  CHECK(std::isfinite(rep.rho.real()));
  CHECK(std::abs(rep.rho.imag()) < 1e-10 * std::abs(rep.rho));
  CHECK(rep.rho.real() < 0.0);  // predicted cos = 1: classical sign
  CHECK(rep.predicted_cos == 1.0);
  CHECK(rep.parity0 > 0.9999);
  CHECK_FALSE(rep.lcao_degenerate);
}

TEST_CASE("interaction table: conjugation structure and planet dominance") {
  const OmegaTable& om = omega_b();
  const int n = om.nu_max + 1;
  REQUIRE(n == 5);
  REQUIRE(om.entries.size() == 25);

  // conj Omega(a,b) = Omega(b,a) holds at rounding level because the angular
  // node sets are inversion paired (measured worst 2e-14 relative).
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const cplx lhs = std::conj(om.at(a, b));
      const cplx rhs = om.at(b, a);
      const double den = std::abs(lhs) + std::abs(rhs);
      if (den > 0.0) CHECK(std::abs(lhs - rhs) < 1e-10 * den);
    }
  // Diagonal entries are real.
  for (int a = 0; a < n; ++a) {
    const cplx d = om.at(a, a);
    if (std::abs(d) > 0.0) CHECK(std::abs(d.imag()) < 1e-10 * std::abs(d));
  }
  // The planet-planet term dominates the whole table.
  const double planet = std::abs(om.at(0, 0));
  CHECK(planet > 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != 0 || b != 0) CHECK(std::abs(om.at(a, b)) < planet);

  CHECK(om.moderate_regime);
  CHECK_FALSE(om.regime_note.empty());
  CHECK(om.regime_note.find("overlap") == std::string::npos);  // D=2.4: disjoint

  CHECK_THROWS_AS(om.at(5, 0), std::out_of_range);
  CHECK_THROWS_AS(om.at(0, -1), std::out_of_range);
}

TEST_CASE("interaction table tracks the hopping coefficient") {
  const OmegaTable& om = omega_b();
  const TunnelingReport rep = double_well_report(sys_b(), fast_request(), &ws_b());
  // sum(Omega) = -rho up to field-replacement and discretization error
  // (measured 0.125 relative at h = 0.15).
  CHECK(std::abs(om.sum() + rep.rho) < 0.2 * std::abs(rep.rho));
  CHECK(gamma_b().value > 0.0);
  CHECK(gamma_b().rel_spread < 0.15);
}

TEST_CASE("sophon-sophon entries scale exactly with tau^2") {
  SystemConfig cfg = config_b();
  cfg.overrides.tau = 1e-4;  // tau / 10
  const ResolvedSystem weak = resolve_system(cfg, grid_b());
  // Same radial states and Gamma: the table is bilinear in the amplitudes.
  const OmegaTable om2 = omega_table(weak, ws_b(), gamma_b());
  const OmegaTable& om1 = omega_b();
  const int n = om1.nu_max + 1;
  for (int a = 1; a < n; ++a)
    for (int b = 1; b < n; ++b) {
      if (std::abs(om2.at(a, b)) == 0.0) continue;
      const double ratio = std::abs(om1.at(a, b)) / std::abs(om2.at(a, b));
      CHECK(ratio == doctest::Approx(100.0).epsilon(1e-8));
    }
  // Planet-sophon entries scale with tau^1.
  for (int b = 1; b < n; ++b) {
    if (std::abs(om2.at(0, b)) == 0.0) continue;
    const double ratio = std::abs(om1.at(0, b)) / std::abs(om2.at(0, b));
    CHECK(ratio == doctest::Approx(10.0).epsilon(1e-8));
  }
  // The planet-planet entry does not move at all.
  CHECK(om1.at(0, 0) == om2.at(0, 0));
}

TEST_CASE("interaction table input validation") {
  // Gauge phases are required.
  SystemConfig cfg = config_b();
  cfg.gauge = GaugePhases::off;
  const ResolvedSystem off = resolve_system(cfg, grid_b());
  CHECK_THROWS_AS(omega_table(off, ws_b(), gamma_b()), std::invalid_argument);

  // The spectral parameter must lie below the field strength.
  WellStates fake = ws_b();
  fake.e0 = config_b().params.lambda + 1.0;
  CHECK_THROWS_AS(omega_table(sys_b(), fake, gamma_b()), std::invalid_argument);
}

TEST_CASE("sweep: sign change located, deterministic under concurrency") {
  const std::vector<double> ys = {0.05, 0.15, 0.25, 0.35, 0.45};
  const SweepSummary seq =
      sweep_ybar(config_sweep(), grid_b(), ys, fast_request(), 1);
  REQUIRE(seq.points.size() == 5);
  CHECK(seq.failures == 0);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    CHECK(seq.points[i].ok);
    CHECK(seq.points[i].ybar == ys[i]);
  }

  // S(ybar) oscillates at the snapped frequency lambda * d1 = 7.2; the
  // direct planet channel offsets the zero from the bare cos zero to the
  // measured 0.346 (S is +5.3e-6 at 0.05 and -5.0e-8 at 0.45).
  CHECK(seq.points.front().report.S > 0.0);
  CHECK(seq.points.back().report.S < 0.0);
  REQUIRE(seq.zero_crossings.size() == 1);
  CHECK(seq.zero_crossings[0] == doctest::Approx(0.346).epsilon(0.01));
  CHECK(seq.mean_crossing_spacing == 0.0);  // fewer than two crossings
  CHECK(seq.spacing_ratio == 0.0);
  CHECK(seq.predicted_spacing ==
        doctest::Approx(3.14159265358979 / (2.0 * std::pow(2.4, 1.5))).epsilon(1e-12));
  CHECK(seq.fitted_amplitude > 0.0);
  CHECK(seq.fac_rho_fit > 0.0);

  // The parity of the unrestricted ground flips across the crossing.
  CHECK(seq.points[1].report.parity0 > 0.9999);
  CHECK(seq.points[4].report.parity0 < -0.9999);

  // Concurrent execution returns bit-identical results.
  const SweepSummary par =
      sweep_ybar(config_sweep(), grid_b(), ys, fast_request(), 2);
  REQUIRE(par.points.size() == seq.points.size());
  for (std::size_t i = 0; i < seq.points.size(); ++i) {
    CHECK(par.points[i].report.S == seq.points[i].report.S);
    CHECK(par.points[i].report.rho == seq.points[i].report.rho);
    CHECK(par.points[i].report.E0 == seq.points[i].report.E0);
  }

  CHECK_THROWS_AS(sweep_ybar(config_sweep(), grid_b(), {}, fast_request(), 1),
                  std::invalid_argument);
}

TEST_CASE("degeneracy search brackets the sign change") {
  SolveRequest req = fast_request();
  req.bisect_width = 2e-3;
  const DegeneracySearch ds =
      find_degeneracy(config_sweep(), grid_b(), {0.15, 0.45}, req);

  CHECK(ds.ystar > 0.15);
  CHECK(ds.ystar < 0.45);
  CHECK(ds.ystar == doctest::Approx(0.3352).epsilon(0.01));
  // Stops on the splitting tolerance or on the bracket width.
  CHECK((ds.tol_met || ds.final_width <= 2e-3 * (1.0 + 1e-12)));
  CHECK(ds.evaluations >= 3);
  // The splitting at the located point is far smaller than at the endpoints
  // (|S| is ~3.6e-6 at 0.15, ~5.0e-8 at 0.45, and ~4e-9 at the star).
  CHECK(std::abs(ds.at_star.S) < 0.05 * std::abs(ds.at_lo.S));
  CHECK(std::abs(ds.at_star.S) < 0.3 * std::abs(ds.at_hi.S));
  // Opposite-parity ground states on the two sides.
  CHECK(ds.at_lo.parity0 * ds.at_hi.parity0 < 0.0);

  // A bracket without a sign change is rejected.
  CHECK_THROWS_AS(find_degeneracy(config_sweep(), grid_b(), {0.02, 0.1}, req),
                  std::invalid_argument);
  CHECK_THROWS_AS(find_degeneracy(config_sweep(), grid_b(), {0.3, 0.2}, req),
                  std::invalid_argument);
}

TEST_CASE("gaussian decay diagnostics") {
  // The single-well tail decays like exp(-lambda r^2 / 4) with an algebraic
  // correction that steepens the fitted slope (measured ratio 1.186 at this
  // annulus); the fit must land above -lambda/4 but within ~35%.
  const DecayFit fit = gaussian_decay_fit(ws_a().phi0, 0.0, {2.2, 3.0});
  const double ref = -4.0 / 4.0;
  CHECK(fit.samples > 100);
  CHECK(fit.slope < ref);
  CHECK(fit.slope / ref > 1.0);
  CHECK(fit.slope / ref < 1.35);

  // Distance measured from the support edge changes the regressor.
  const DecayFit shifted = gaussian_decay_fit(ws_a().phi0, 1.0, {2.2, 3.0});
  CHECK(shifted.slope < fit.slope);  // same log-drop over smaller dist^2

  CHECK_THROWS_AS(gaussian_decay_fit(ws_a().phi0, 0.0, {3.0, 2.2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(gaussian_decay_fit(ws_a().phi0, -1.0, {2.2, 3.0}),
                  std::invalid_argument);
  // Annulus outside the box: no samples survive.
  CHECK_THROWS_AS(gaussian_decay_fit(ws_a().phi0, 0.0, {20.0, 30.0}),
                  std::invalid_argument);
  // Constant field: no variation to regress on.
  GridField flat(grid_a());
  for (auto& v : flat.values) v = 1.0;
  CHECK_THROWS_AS(gaussian_decay_fit(flat, 0.0, {2.2, 3.0}),
                  std::invalid_argument);
}
