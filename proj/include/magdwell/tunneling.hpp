#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magdwell/eigensolve.hpp"
#include "magdwell/grid.hpp"
#include "magdwell/kernels.hpp"
#include "magdwell/operator.hpp"
#include "magdwell/params.hpp"
#include "magdwell/potential.hpp"

namespace magdwell {

// ---------------------------------------------------------------------------
// System plumbing
// ---------------------------------------------------------------------------

// A full run configuration before grid snapping: model parameters, desk-scale
// overrides, and whether the hop terms carry gauge phases.
struct SystemConfig {
  ModelParams params;
  DeskOverrides overrides;
  GaugePhases gauge = GaugePhases::on;
};

// Configuration resolved against a concrete grid: the half separation d1 is
// snapped to an even lattice multiple (so +-d are exact lattice translations)
// and the single- and double-well potential specs are materialized.
struct ResolvedSystem {
  SystemConfig config;
  Grid2D grid;
  DerivedParams derived;      // d1 snapped
  PotentialSpec single_spec;  // origin-centered well with sophons
  PotentialSpec dw_spec;      // left + right wells
};

ResolvedSystem resolve_system(const SystemConfig& cfg, const Grid2D& grid);

// Quadrature sizes for the interaction table (polar tensor Gauss per support
// disc; angular nodes equispaced midpoints, radial nodes Gauss-Legendre).
struct OmegaQuadrature {
  int planet_radial = 32;
  int planet_angular = 32;
  int sophon_radial = 12;
  int sophon_angular = 12;
  int kernel_table_size = 4096;  // log-spaced radial kernel interpolation table
};

// Solver and pipeline knobs shared by the tunneling operations.
struct SolveRequest {
  double tol = 1e-10;
  int max_iter = 600;
  int k = 4;  // unrestricted double-well solve size
  std::uint64_t seed = 0x6d61676477656cULL;
  GaugePhases gauge = GaugePhases::on;

  // Degeneracy search stops: |S| <= 10*tol*|e_lambda| or width <= bisect_width.
  double bisect_width = 1e-4;
  int bisect_max_iter = 60;

  bool with_omega = false;          // attach the interaction table to reports
  bool with_operator_form = false;  // hopping cross-check <phiL,(H-e)phiR>
  OmegaQuadrature omega_quad{};
};

// ---------------------------------------------------------------------------
// Single well and orbitals
// ---------------------------------------------------------------------------

// Ground-state data of the origin-centered well: the decorated state phi
// (sophons at the configured tau) and the radial reference phi0 (tau = 0),
// with a deterministic global phase (center sample real positive) and, where
// the potential has the exact discrete symmetry, the x2-mirror and inversion
// symmetrizations applied so phase cancellations in pairings are exact.
struct WellStates {
  GridField phi;   // decorated ground state, unit norm
  double e = 0.0;  // its energy e_lambda
  GridField phi0;  // radial tau=0 reference, unit norm
  double e0 = 0.0;
  double gap_estimate = 0.0;      // e1 - e0 of the decorated k=3 solve
  double radial_variance = 0.0;   // relative angular variance of |phi0| over
                                  // the grid-exact dihedral images
  bool radial_ok = true;          // radial_variance <= 1e-6
  bool converged = true;
  int iterations = 0;
  GaugePhases gauge = GaugePhases::on;  // gauge the states were solved under

  // Converged block of the decorated solve, kept as a warm start for
  // neighboring configurations (sweeps, bisection).
  std::vector<GridField> solver_cache;
};

// Solves the tau-as-configured and tau=0 problems (k=3, warm-started radial
// -> decorated).  If radial_donor is given, its phi0/e0 are reused verbatim
// (they do not depend on ybar) and only the decorated problem is re-solved.
// spec.kind must be single_centered.
WellStates single_well_ground(const PotentialSpec& spec, const Grid2D& grid,
                              const SolveRequest& req = {},
                              const WellStates* radial_donor = nullptr);

// Left/right orbitals: phiL is the phase-dressed translate of phi onto the
// left well (shift -d), phiR(x) = phiL(-x) taken as an exact index
// permutation.  lambda_phase is the field strength entering the translation
// phase; pass 0 to build plain translates for gauge-off runs.
struct OrbitalPair {
  GridField phiL;
  GridField phiR;
  Point2 d{};
  cplx overlap{};  // <phiL, phiR>
};

OrbitalPair build_orbitals(const WellStates& ws, Point2 d, double lambda_phase,
                           const Grid2D& grid);

// ---------------------------------------------------------------------------
// Hopping coefficient and the two-level (LCAO) estimate
// ---------------------------------------------------------------------------

// rho = <phiL, vR phiR> evaluated as a potential-weighted overlap (h^2 sum),
// together with the mirror form <vL phiL, phiR>; the two agree up to rounding
// and their gap is kept as a consistency diagnostic.
struct HoppingResult {
  cplx rho{};      // <phiL, vR phiR>
  cplx rho_alt{};  // <vL phiL, phiR>
  double form_gap = 0.0;
};

HoppingResult hopping(const OrbitalPair& pair, const PotentialSpec& dw_spec,
                      const Grid2D& grid);

// Definition-form cross-check <phiL, (H - e) phiR>; carries the eigenvalue
// residual of phi as an extra absolute error, so it is a diagnostic only.
cplx hopping_operator_form(const OrbitalPair& pair, const MagneticOperator& dw_op,
                           double e_lambda);

// Rayleigh quotients of the symmetric/antisymmetric orbital combinations
//   E(sigma) - e = [2 sigma Re rho + dd] / ||phiL + sigma phiR||^2,
//   dd = <vR phiL, phiL> + <vL phiR, phiR>,
// evaluated from potential multiplications only.
struct LcaoEstimate {
  double S_lcao = 0.0;      // odd_shift - even_shift
  double even_shift = 0.0;  // sigma = +1
  double odd_shift = 0.0;   // sigma = -1
  double diag_correction = 0.0;  // dd (sigma-independent numerator part)
  double minus_two_rho = 0.0;    // leading-order proxy for S
  double denom_even = 0.0;       // ||phiL + phiR||^2
  double denom_odd = 0.0;        // ||phiL - phiR||^2
  bool degenerate_denominator = false;  // a denominator fell below 1e-12
};

LcaoEstimate lcao_estimate(const OrbitalPair& pair, const PotentialSpec& dw_spec,
                           const Grid2D& grid, const HoppingResult& hop);

// ---------------------------------------------------------------------------
// Interaction table
// ---------------------------------------------------------------------------

// Pairwise well-component interactions
//   Omega(nu_r, nu_l) = Int Int A_r(x) conj(phiR(x)) K(x-y) e^{-i(lambda/2) x^y}
//                               A_l(y) phiL(y) dx dy,
// index 0 = planet (A = lambda^2 v0), nu >= 1 = sophon nu (A = tau W_nu);
// the first index runs over right-well components (x), the second over
// left-well components (y).  Fields use the radial reference phi0: bilinear
// grid samples inside the planet disc, Gamma*K outside.  -sum() approximates
// the hopping coefficient rho.
struct OmegaTable {
  int nu_max = 0;
  std::vector<cplx> entries;  // (nu_max+1)^2, row-major [nu_right][nu_left]
  bool moderate_regime = false;
  std::string regime_note;

  cplx at(int nu_right, int nu_left) const;
  cplx sum() const;
};

OmegaTable omega_table(const ResolvedSystem& sys, const WellStates& ws,
                       const GammaEstimate& gamma, const OmegaQuadrature& quad = {});

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct TunnelingReport {
  // resolved configuration echo
  double lambda = 0.0;
  double ybar = 0.0;
  double d1 = 0.0;   // snapped half separation
  double delta = 0.0;
  double tau = 0.0;
  bool moderate_regime = false;
  bool gauge_on = true;

  // energies
  double E0 = 0.0, E1 = 0.0;          // unrestricted k>=2 solve
  double E_even = 0.0, E_odd = 0.0;   // sector ground states
  double Delta = 0.0;                 // E1 - E0
  double S = 0.0;                     // E_odd - E_even (signed splitting)
  double e_lambda = 0.0;              // single-well ground energy
  double e0_lambda = 0.0;             // radial tau=0 reference energy
  double gap_estimate = 0.0;

  // hopping
  cplx rho{};
  double rho_form_gap = 0.0;
  cplx overlap{};                      // <phiL, phiR>
  std::optional<cplx> rho_operator_form;

  // two-level estimate
  double rho_lcao_S = 0.0;        // Rayleigh-quotient splitting estimate
  double lcao_diag_correction = 0.0;
  bool lcao_degenerate = false;

  // predictions and parity
  double predicted_cos = 0.0;  // cos((lambda/2) D^{3/2} ybar), model D
  double parity0 = 0.0;        // <psi0, P psi0> of the unrestricted ground

  // diagnostics
  bool solver_converged = true;
  bool radial_ok = true;
  int total_iterations = 0;

  std::optional<OmegaTable> omega;
};

// Full pipeline at one configuration: single-well solve, orbitals, hopping,
// two-level estimate, unrestricted k-solve plus both parity-sector solves.
// Solver failures are propagated as a partial report with
// solver_converged = false (values are still the best available).
TunnelingReport double_well_report(const ResolvedSystem& sys,
                                   const SolveRequest& req = {},
                                   const WellStates* radial_donor = nullptr);

// ---------------------------------------------------------------------------
// Parameter sweeps and degeneracy search
// ---------------------------------------------------------------------------

struct SweepPoint {
  double ybar = 0.0;
  bool ok = false;
  std::string error;
  TunnelingReport report;
};

struct SweepSummary {
  std::vector<SweepPoint> points;  // input order
  int failures = 0;

  // Zero crossings of S(ybar) by linear interpolation between ok points.
  std::vector<double> zero_crossings;
  double mean_crossing_spacing = 0.0;
  double predicted_spacing = 0.0;  // pi / ((lambda/2) D^{3/2}), model D
  double spacing_ratio = 0.0;      // mean/predicted, 0 if fewer than 2 zeros

  // Empirical amplitude fit Re rho(ybar) ~ -A cos(lambda*d1*ybar) at the
  // snapped frequency; fac_rho_fit divides out exp(-(lambda/4)(2D^{5/2}-3D^2)).
  // Reported as a fit, with no claim about the constant's true value.
  double fitted_amplitude = 0.0;
  double fac_rho_fit = 0.0;
};

// Recomputes the full report at each ybar (sophons move with ybar; the
// radial tau=0 reference does not and is solved once).  Per-point failures
// are recorded and the sweep continues.  jobs > 1 runs points concurrently;
// results are deterministic and assembled in input order either way.
SweepSummary sweep_ybar(const SystemConfig& cfg, const Grid2D& grid,
                        const std::vector<double>& ybars,
                        const SolveRequest& req = {}, int jobs = 1);

struct DegeneracySearch {
  double ystar = 0.0;
  TunnelingReport at_star;
  TunnelingReport at_lo;  // bracket endpoints as supplied
  TunnelingReport at_hi;
  int evaluations = 0;
  double final_width = 0.0;
  bool tol_met = false;  // stopped on |S| <= 10*tol*|e_lambda| (vs width)
};

// Bisection on the signed splitting S(ybar) inside a bracket with a sign
// change; throws std::invalid_argument if the endpoints do not straddle one.
DegeneracySearch find_degeneracy(const SystemConfig& cfg, const Grid2D& grid,
                                 std::array<double, 2> bracket,
                                 const SolveRequest& req = {});

// ---------------------------------------------------------------------------
// Decay diagnostics
// ---------------------------------------------------------------------------

struct DecayFit {
  double slope = 0.0;  // d log|phi| / d dist^2, expected ~ -lambda/4
  double intercept = 0.0;
  int samples = 0;
};

// Least-squares fit of log|phi| against dist(x, support)^2 over grid samples
// with |x| in the annulus and |phi| above 1e-12, where dist = max(0, |x| -
// support_radius).  Throws on too few samples or a degenerate regression
// (constant field or collapsed regressor).
DecayFit gaussian_decay_fit(const GridField& phi, double support_radius,
                            std::array<double, 2> annulus);

}  // namespace magdwell
