#pragma once

// Machine-readable output: JSON documents (nlohmann) and plot-ready CSV
// tables.  All numeric CSV output uses 17 significant digits with '.' as the
// decimal separator and '\n' line endings, so values round-trip to the bit
// and files diff cleanly across platforms.

#include <string>
#include <vector>

#include "json.hpp"
#include "magdwell/eigensolve.hpp"
#include "magdwell/params.hpp"
#include "magdwell/tunneling.hpp"

namespace magdwell {

using ordered_json = nlohmann::ordered_json;

/// "%.17g" in the C locale: enough digits to reproduce the double exactly.
std::string fmt17(double x);

ordered_json json_of(const ModelParams& p);
ordered_json json_of(const DerivedParams& dp);
ordered_json json_of(const OrderingReport& ord);
ordered_json json_of(const OmegaTable& table);
ordered_json json_of(const TunnelingReport& rep);
/// Compact per-point record used inside sweep and bracket summaries.
ordered_json json_point(const SweepPoint& pt);
ordered_json json_of(const SweepSummary& sw);
ordered_json json_of(const DegeneracySearch& ds);
ordered_json json_of(const DecayFit& fit);

/// Sweep table with the pinned header
///   ybar,rho_re,rho_im,S,Delta,E_even,E_odd,predicted_cos
/// containing one row per successful point (failed points are skipped, so a
/// partially failed sweep still yields a valid partial table).
std::string sweep_csv(const SweepSummary& sw);

/// Eigenvalue table: index,eigenvalue,residual,parity with parity the
/// inversion expectation Re<v, Pv> of each computed vector.
std::string spectrum_csv(const EigensolveResult& res,
                         const std::vector<double>& parities);

}  // namespace magdwell
