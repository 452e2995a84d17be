#pragma once

// Command-line front end: flat key=value run configurations, the auto grid
// rule, and the six subcommand entry points.  Every command writes a JSON
// report (stdout, or --output PATH) and returns a process exit code:
//
//   0  success
//   1  numerical-check failure (kernel bound/oracle violation, sweep with
//      more than 10% failed points, decay fit starved of samples)
//   2  usage or configuration error
//
// Reports are reproducible: the same configuration and seed produce
// byte-identical JSON when the timestamp field is suppressed
// (--no-timestamp).  Tabular artifacts (sweep and spectrum CSV) are written
// next to the --output path.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "magdwell/grid.hpp"
#include "magdwell/report.hpp"
#include "magdwell/tunneling.hpp"

namespace magdwell {

inline constexpr const char* kMagdwellVersion = "0.1.0";

/// Parse/validation failure in a run configuration; messages carry the
/// source name and 1-based line number ("run.cfg:12: unknown key 'foo'").
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One flat run configuration.  Defaults are the shipped standard preset:
/// lambda=6, D=2, delta=0.05, tau=1e-3, grid n=241 L=9, ybar sweep over
/// [0, 1] with 41 points.
struct RunConfig {
  // model
  double lambda = 6.0;
  double M = 1.0;
  double D = 2.0;
  double ybar = 0.0;
  int nu_max = 4;
  double r0 = 1.0;

  // desk-scale overrides ("formula" in the file clears one back to the
  // asymptotic expression)
  std::optional<double> delta = 0.05;
  std::optional<double> tau = 1e-3;
  std::optional<double> d1;

  // grid; nullopt encodes "auto" (see make_grid)
  std::optional<int> n = 241;
  std::optional<double> L = 9.0;

  // solver
  int k = 4;
  double tol = 1e-10;
  int max_iter = 600;
  std::uint64_t seed = 0x6d61676477656cULL;
  bool gauge_on = true;
  double bisect_width = 1e-4;
  int bisect_max_iter = 60;
  bool with_omega = false;
  bool with_operator_form = false;

  // spectrum: double | single | free | sho
  std::string well = "double";
  double sho_omega = 4.0;

  // sweep: explicit list wins over the range
  std::vector<double> ybar_list;
  double ybar_min = 0.0;
  double ybar_max = 1.0;
  int ybar_count = 41;

  // find-degeneracy
  std::optional<double> bracket_lo;
  std::optional<double> bracket_hi;

  // decay-fit
  double annulus_r1 = 3.4;
  double annulus_r2 = 4.0;
  double decay_support = 0.0;

  // kernel-check; empty radii derive a lattice from scaled radii
  // u = omega r^2 / 2 in {0.2, 0.8, 2, 4.5, 7.5}.  The series oracle itself
  // loses relative accuracy to tail cancellation near the window edge
  // (u ~ 7.5 at z/omega = -1.5 sits at ~1e-6), so the default tolerance
  // leaves headroom above that floor.
  int series_max_terms = 3200000;
  double series_rtol = 5e-6;
  std::vector<double> kernel_z_fracs = {-1.5, -1.0, -0.5, 0.0, 0.5, 0.85};
  std::vector<double> kernel_radii;
};

/// Parse a flat key=value document ('#' comments, blank lines allowed).
/// Unknown keys, duplicate keys, and malformed values are rejected with the
/// offending line number.  `source` names the stream in error messages.
RunConfig parse_run_config(std::istream& in, const std::string& source);

/// Load a configuration file; a missing/unreadable file is a ConfigError.
RunConfig load_run_config(const std::string& path);

/// Resolve the grid: explicit n/L pass through; "auto" applies
///   h = min(0.35/sqrt(lambda), delta/3 if delta >= 0.02 else 0.35/sqrt(lambda)),
///   L = d1 + D + 1 + 6/sqrt(lambda)   (exact, pre-snap d1),
/// with n the smallest odd point count reaching that resolution.
Grid2D make_grid(const RunConfig& rc);

SystemConfig to_system_config(const RunConfig& rc);
SolveRequest to_solve_request(const RunConfig& rc);

/// Every effective key=value of the configuration (defaults included), as
/// echoed into the "config" object of each report.
ordered_json config_echo(const RunConfig& rc);

/// Host-process flags shared by all commands.
struct CliOptions {
  int jobs = 1;
  bool no_timestamp = false;
  std::string output;  // empty: JSON to stdout, no CSV artifacts
};

int cmd_derive_params(const RunConfig& rc, const CliOptions& opt,
                      std::ostream& out, std::ostream& err);
int cmd_kernel_check(const RunConfig& rc, const CliOptions& opt,
                     std::ostream& out, std::ostream& err);
int cmd_spectrum(const RunConfig& rc, const CliOptions& opt, std::ostream& out,
                 std::ostream& err);
int cmd_sweep(const RunConfig& rc, const CliOptions& opt, std::ostream& out,
              std::ostream& err);
int cmd_find_degeneracy(const RunConfig& rc, const CliOptions& opt,
                        std::ostream& out, std::ostream& err);
int cmd_decay_fit(const RunConfig& rc, const CliOptions& opt, std::ostream& out,
                  std::ostream& err);

}  // namespace magdwell
