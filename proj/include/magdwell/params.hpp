#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "magdwell/geometry.hpp"

namespace magdwell {

/// Model configuration: coupling lambda, separation exponent inputs M and D,
/// sophon displacement ybar, sophon count, planet support radius.
struct ModelParams {
  double lambda = 6.0;
  double M = 1.0;
  double D = 2.0;
  double ybar = 0.0;
  int nu_max = 4;
  double r0 = 1.0;
};

/// Desk-scale overrides. The exact delta/tau underflow double precision in the
/// asymptotic regime, so runs at workstation scale substitute explicit values;
/// any active override marks the run "moderate regime".
struct DeskOverrides {
  std::optional<double> delta;
  std::optional<double> tau;
  std::optional<double> d1;
};

struct DerivedParams {
  ModelParams model;

  // Exact ledger values, always carried in log-space; the linear-scale fields
  // hold exp(log_*) and may underflow to 0 in the asymptotic regime.
  double log_delta = 0.0;
  double log_tau = 0.0;
  double delta = 0.0;
  double tau = 0.0;
  double d1 = 0.0;

  // Sophon centers of the origin-centered single well, ordered
  // (D,ybar), (D,-ybar), (-D,-ybar), (-D,ybar); first nu_max entries are live.
  std::vector<Point2> centers;

  bool moderate_regime = false;

  std::vector<Point2> left_centers() const;   // zeta_nu - d
  std::vector<Point2> right_centers() const;  // -(zeta_nu - d)
  Point2 d() const { return {d1, 0.0}; }
};

/// Ordering diagnostic: separation ratio 2*d1/D = D^{1/2} and the admissible
/// log-window for tau*delta^2 (unknown absolute constants dropped).
struct OrderingReport {
  double separation_ratio = 0.0;
  bool well_separated = false;
  double log_tau_delta_sq = 0.0;
  double window_lo_log = 0.0;
  double window_hi_log = 0.0;
  bool inside_window = false;
  bool moderate_regime = false;
  std::string verdict;
};

/// Derive delta, tau, d1 and the sophon centers from the model parameters.
/// Overrides substitute verbatim and flag the run as moderate regime.
/// Throws std::invalid_argument on parameter-range violations.
DerivedParams derive_parameters(const ModelParams& p, const DeskOverrides& o = {});

OrderingReport check_ordering(const ModelParams& p, const DerivedParams& dp);

}  // namespace magdwell
