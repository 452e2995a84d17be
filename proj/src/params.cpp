#include "magdwell/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace magdwell {

std::vector<Point2> DerivedParams::left_centers() const {
  std::vector<Point2> out;
  out.reserve(centers.size());
  for (auto z : centers) out.push_back(z - d());
  return out;
}

std::vector<Point2> DerivedParams::right_centers() const {
  std::vector<Point2> out;
  out.reserve(centers.size());
  for (auto z : centers) out.push_back(-(z - d()));
  return out;
}

DerivedParams derive_parameters(const ModelParams& p, const DeskOverrides& o) {
  if (!(p.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(p.M > 0.0)) throw std::invalid_argument("M must be positive");
  if (!(p.D > 0.0)) throw std::invalid_argument("D must be positive");
  if (!(p.ybar >= 0.0 && p.ybar <= 1.0))
    throw std::invalid_argument("ybar must lie in [0,1]");
  if (p.nu_max < 1 || p.nu_max > 4)
    throw std::invalid_argument("nu_max must be one of {1,2,3,4}");
  if (!(p.r0 > 0.0)) throw std::invalid_argument("r0 must be positive");

  DerivedParams dp;
  dp.model = p;

  const double D32 = std::pow(p.D, 1.5);
  const double D52 = std::pow(p.D, 2.5);
  dp.log_delta = -p.M * p.lambda * D32;
  dp.log_tau = -(p.lambda / 4.0) * (2.0 * D52 - 3.0 * p.D * p.D);
  dp.delta = std::exp(dp.log_delta);
  dp.tau = std::exp(dp.log_tau);
  dp.d1 = D32 / 2.0;

  dp.moderate_regime = false;
  if (o.delta) {
    if (!(*o.delta > 0.0)) throw std::invalid_argument("delta override must be positive");
    dp.delta = *o.delta;
    dp.log_delta = std::log(*o.delta);
    dp.moderate_regime = true;
  }
  if (o.tau) {
    if (!(*o.tau > 0.0)) throw std::invalid_argument("tau override must be positive");
    dp.tau = *o.tau;
    dp.log_tau = std::log(*o.tau);
    dp.moderate_regime = true;
  }
  if (o.d1) {
    if (!(*o.d1 > 0.0)) throw std::invalid_argument("d1 override must be positive");
    dp.d1 = *o.d1;
    dp.moderate_regime = true;
  }

  dp.centers = {{p.D, p.ybar}, {p.D, -p.ybar}, {-p.D, -p.ybar}, {-p.D, p.ybar}};
  dp.centers.resize(static_cast<std::size_t>(p.nu_max));
  return dp;
}

OrderingReport check_ordering(const ModelParams& p, const DerivedParams& dp) {
  OrderingReport r;
  r.moderate_regime = dp.moderate_regime;
  // 2*d1 vs D; with the exact ledger d1 = D^{3/2}/2 this is sqrt(D).
  r.separation_ratio = 2.0 * dp.d1 / p.D;
  r.well_separated = r.separation_ratio >= 3.0;

  // Admissible window for tau*delta^2 in log-space, unquantified absolute
  // constants set to zero:
  //   (lambda/2)D^2 - (lambda/2)D^{5/2}  <  log(tau delta^2)  <  lambda D^2 - (lambda/2)D^{5/2}
  const double D52 = std::pow(p.D, 2.5);
  r.log_tau_delta_sq = dp.log_tau + 2.0 * dp.log_delta;
  r.window_lo_log = (p.lambda / 2.0) * p.D * p.D - (p.lambda / 2.0) * D52;
  r.window_hi_log = p.lambda * p.D * p.D - (p.lambda / 2.0) * D52;
  r.inside_window =
      r.log_tau_delta_sq > r.window_lo_log && r.log_tau_delta_sq < r.window_hi_log;

  std::ostringstream os;
  os << (r.well_separated ? "well separated" : "marginally separated");
  if (r.moderate_regime && !r.inside_window)
    os << "; outside asymptotic window (moderate regime)";
  else if (!r.inside_window)
    os << "; outside asymptotic window";
  else
    os << "; inside asymptotic window";
  r.verdict = os.str();
  return r;
}

}  // namespace magdwell
