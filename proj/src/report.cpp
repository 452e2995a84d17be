#include "magdwell/report.hpp"

#include <cstdio>

namespace magdwell {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ordered_json json_of(const ModelParams& p) {
  ordered_json j;
  j["lambda"] = p.lambda;
  j["M"] = p.M;
  j["D"] = p.D;
  j["ybar"] = p.ybar;
  j["nu_max"] = p.nu_max;
  j["r0"] = p.r0;
  return j;
}

ordered_json json_of(const DerivedParams& dp) {
  ordered_json j;
  j["delta"] = dp.delta;
  j["log_delta"] = dp.log_delta;
  j["tau"] = dp.tau;
  j["log_tau"] = dp.log_tau;
  j["d1"] = dp.d1;
  ordered_json centers = ordered_json::array();
  for (const Point2& c : dp.centers) centers.push_back({c.x, c.y});
  j["centers"] = std::move(centers);
  j["moderate_regime"] = dp.moderate_regime;
  return j;
}

ordered_json json_of(const OrderingReport& ord) {
  ordered_json j;
  j["separation_ratio"] = ord.separation_ratio;
  j["well_separated"] = ord.well_separated;
  j["log_tau_delta_sq"] = ord.log_tau_delta_sq;
  j["window_lo_log"] = ord.window_lo_log;
  j["window_hi_log"] = ord.window_hi_log;
  j["inside_window"] = ord.inside_window;
  j["moderate_regime"] = ord.moderate_regime;
  j["verdict"] = ord.verdict;
  return j;
}

ordered_json json_of(const OmegaTable& table) {
  ordered_json j;
  j["nu_max"] = table.nu_max;
  ordered_json re = ordered_json::array(), im = ordered_json::array();
  const int m = table.nu_max + 1;
  for (int a = 0; a < m; ++a) {
    ordered_json row_re = ordered_json::array(), row_im = ordered_json::array();
    for (int b = 0; b < m; ++b) {
      const cplx v = table.at(a, b);
      row_re.push_back(v.real());
      row_im.push_back(v.imag());
    }
    re.push_back(std::move(row_re));
    im.push_back(std::move(row_im));
  }
  j["entries_re"] = std::move(re);
  j["entries_im"] = std::move(im);
  const cplx s = table.sum();
  j["sum_re"] = s.real();
  j["sum_im"] = s.imag();
  j["moderate_regime"] = table.moderate_regime;
  j["regime_note"] = table.regime_note;
  return j;
}

ordered_json json_of(const TunnelingReport& rep) {
  ordered_json j;
  j["lambda"] = rep.lambda;
  j["ybar"] = rep.ybar;
  j["d1"] = rep.d1;
  j["delta"] = rep.delta;
  j["tau"] = rep.tau;
  j["moderate_regime"] = rep.moderate_regime;
  j["gauge_on"] = rep.gauge_on;
  j["E0"] = rep.E0;
  j["E1"] = rep.E1;
  j["E_even"] = rep.E_even;
  j["E_odd"] = rep.E_odd;
  j["Delta"] = rep.Delta;
  j["S"] = rep.S;
  j["e_lambda"] = rep.e_lambda;
  j["e0_lambda"] = rep.e0_lambda;
  j["gap_estimate"] = rep.gap_estimate;
  j["rho_re"] = rep.rho.real();
  j["rho_im"] = rep.rho.imag();
  j["rho_form_gap"] = rep.rho_form_gap;
  j["overlap_re"] = rep.overlap.real();
  j["overlap_im"] = rep.overlap.imag();
  if (rep.rho_operator_form) {
    j["rho_operator_form_re"] = rep.rho_operator_form->real();
    j["rho_operator_form_im"] = rep.rho_operator_form->imag();
  }
  j["rho_lcao_S"] = rep.rho_lcao_S;
  j["lcao_diag_correction"] = rep.lcao_diag_correction;
  j["lcao_degenerate"] = rep.lcao_degenerate;
  j["predicted_cos"] = rep.predicted_cos;
  j["parity0"] = rep.parity0;
  j["solver_converged"] = rep.solver_converged;
  j["radial_ok"] = rep.radial_ok;
  j["total_iterations"] = rep.total_iterations;
  if (rep.omega) j["omega"] = json_of(*rep.omega);
  return j;
}

ordered_json json_point(const SweepPoint& pt) {
  ordered_json j;
  j["ybar"] = pt.ybar;
  j["ok"] = pt.ok;
  if (!pt.ok) {
    j["error"] = pt.error;
    return j;
  }
  const TunnelingReport& r = pt.report;
  j["rho_re"] = r.rho.real();
  j["rho_im"] = r.rho.imag();
  j["S"] = r.S;
  j["Delta"] = r.Delta;
  j["E_even"] = r.E_even;
  j["E_odd"] = r.E_odd;
  j["E0"] = r.E0;
  j["E1"] = r.E1;
  j["parity0"] = r.parity0;
  j["predicted_cos"] = r.predicted_cos;
  j["solver_converged"] = r.solver_converged;
  j["total_iterations"] = r.total_iterations;
  return j;
}

ordered_json json_of(const SweepSummary& sw) {
  ordered_json j;
  ordered_json pts = ordered_json::array();
  for (const SweepPoint& pt : sw.points) pts.push_back(json_point(pt));
  j["points"] = std::move(pts);
  j["failures"] = sw.failures;
  j["zero_crossings"] = sw.zero_crossings;
  j["mean_crossing_spacing"] = sw.mean_crossing_spacing;
  j["predicted_spacing"] = sw.predicted_spacing;
  j["spacing_ratio"] = sw.spacing_ratio;
  j["fitted_amplitude"] = sw.fitted_amplitude;
  j["fac_rho_fit"] = sw.fac_rho_fit;
  return j;
}

ordered_json json_of(const DegeneracySearch& ds) {
  ordered_json j;
  j["ystar"] = ds.ystar;
  j["S_star"] = ds.at_star.S;
  j["Delta_star"] = ds.at_star.Delta;
  j["evaluations"] = ds.evaluations;
  j["final_width"] = ds.final_width;
  j["tol_met"] = ds.tol_met;
  j["at_star"] = json_of(ds.at_star);
  SweepPoint lo;
  lo.ybar = ds.at_lo.ybar;
  lo.ok = true;
  lo.report = ds.at_lo;
  SweepPoint hi;
  hi.ybar = ds.at_hi.ybar;
  hi.ok = true;
  hi.report = ds.at_hi;
  j["at_lo"] = json_point(lo);
  j["at_hi"] = json_point(hi);
  return j;
}

ordered_json json_of(const DecayFit& fit) {
  ordered_json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["samples"] = fit.samples;
  return j;
}

std::string sweep_csv(const SweepSummary& sw) {
  std::string csv = "ybar,rho_re,rho_im,S,Delta,E_even,E_odd,predicted_cos\n";
  for (const SweepPoint& pt : sw.points) {
    if (!pt.ok) continue;
    const TunnelingReport& r = pt.report;
    csv += fmt17(pt.ybar);
    csv += ',';
    csv += fmt17(r.rho.real());
    csv += ',';
    csv += fmt17(r.rho.imag());
    csv += ',';
    csv += fmt17(r.S);
    csv += ',';
    csv += fmt17(r.Delta);
    csv += ',';
    csv += fmt17(r.E_even);
    csv += ',';
    csv += fmt17(r.E_odd);
    csv += ',';
    csv += fmt17(r.predicted_cos);
    csv += '\n';
  }
  return csv;
}

std::string spectrum_csv(const EigensolveResult& res,
                         const std::vector<double>& parities) {
  std::string csv = "index,eigenvalue,residual,parity\n";
  for (std::size_t i = 0; i < res.values.size(); ++i) {
    csv += std::to_string(i);
    csv += ',';
    csv += fmt17(res.values[i]);
    csv += ',';
    csv += fmt17(i < res.residuals.size() ? res.residuals[i] : 0.0);
    csv += ',';
    csv += fmt17(i < parities.size() ? parities[i] : 0.0);
    csv += '\n';
  }
  return csv;
}

}  // namespace magdwell
