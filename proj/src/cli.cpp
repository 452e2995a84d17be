#include "magdwell/cli.hpp"

#include <cctype>
#include <cerrno>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "magdwell/kernels.hpp"

namespace magdwell {

namespace {

// ---------------------------------------------------------------------------
// Value parsing
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void bad_value(const std::string& where, const std::string& key,
                            const std::string& v, const char* expected) {
  throw ConfigError(where + ": invalid value '" + v + "' for key '" + key +
                    "' (expected " + expected + ")");
}

double parse_double(const std::string& where, const std::string& key,
                    const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
    bad_value(where, key, v, "a finite number");
  return x;
}

int parse_int(const std::string& where, const std::string& key,
              const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE || x < INT_MIN ||
      x > INT_MAX)
    bad_value(where, key, v, "an integer");
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& where, const std::string& key,
                        const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const int base = (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X'))
                       ? 16
                       : 10;
  const unsigned long long x = std::strtoull(v.c_str(), &end, base);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE || v[0] == '-')
    bad_value(where, key, v, "an unsigned 64-bit integer");
  return x;
}

bool parse_bool(const std::string& where, const std::string& key,
                const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  bad_value(where, key, v, "a boolean (true/false/on/off/1/0)");
}

std::vector<double> parse_list(const std::string& where, const std::string& key,
                               const std::string& v) {
  std::vector<double> out;
  std::size_t pos = 0;
  if (trim(v).empty())
    throw ConfigError(where + ": key '" + key + "' has an empty list value");
  while (pos <= v.size()) {
    const std::size_t comma = v.find(',', pos);
    const std::string item =
        trim(v.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (item.empty()) bad_value(where, key, v, "comma-separated numbers");
    out.push_back(parse_double(where, key, item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Key dispatch
// ---------------------------------------------------------------------------

using Setter =
    std::function<void(RunConfig&, const std::string& where,
                       const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  auto dbl = [](double RunConfig::*f) {
    return [f](RunConfig& rc, const std::string& w, const std::string& k,
               const std::string& v) { rc.*f = parse_double(w, k, v); };
  };
  auto integer = [](int RunConfig::*f) {
    return [f](RunConfig& rc, const std::string& w, const std::string& k,
               const std::string& v) { rc.*f = parse_int(w, k, v); };
  };
  auto boolean = [](bool RunConfig::*f) {
    return [f](RunConfig& rc, const std::string& w, const std::string& k,
               const std::string& v) { rc.*f = parse_bool(w, k, v); };
  };
  auto opt_dbl = [](std::optional<double> RunConfig::*f, const char* clear) {
    return [f, clear](RunConfig& rc, const std::string& w, const std::string& k,
                      const std::string& v) {
      if (v == clear)
        rc.*f = std::nullopt;
      else
        rc.*f = parse_double(w, k, v);
    };
  };
  auto list = [](std::vector<double> RunConfig::*f) {
    return [f](RunConfig& rc, const std::string& w, const std::string& k,
               const std::string& v) { rc.*f = parse_list(w, k, v); };
  };

  static const std::map<std::string, Setter> table = {
      // model
      {"lambda", dbl(&RunConfig::lambda)},
      {"M", dbl(&RunConfig::M)},
      {"D", dbl(&RunConfig::D)},
      {"ybar", dbl(&RunConfig::ybar)},
      {"nu_max", integer(&RunConfig::nu_max)},
      {"r0", dbl(&RunConfig::r0)},
      // overrides; the literal value "formula" restores the asymptotic form
      {"delta", opt_dbl(&RunConfig::delta, "formula")},
      {"tau", opt_dbl(&RunConfig::tau, "formula")},
      {"d1", opt_dbl(&RunConfig::d1, "formula")},
      // grid
      {"n",
       [](RunConfig& rc, const std::string& w, const std::string& k,
          const std::string& v) {
         if (v == "auto")
           rc.n = std::nullopt;
         else
           rc.n = parse_int(w, k, v);
       }},
      {"L", opt_dbl(&RunConfig::L, "auto")},
      // solver
      {"k", integer(&RunConfig::k)},
      {"tol", dbl(&RunConfig::tol)},
      {"max_iter", integer(&RunConfig::max_iter)},
      {"seed",
       [](RunConfig& rc, const std::string& w, const std::string& k,
          const std::string& v) { rc.seed = parse_u64(w, k, v); }},
      {"gauge",
       [](RunConfig& rc, const std::string& w, const std::string& k,
          const std::string& v) { rc.gauge_on = parse_bool(w, k, v); }},
      {"bisect_width", dbl(&RunConfig::bisect_width)},
      {"bisect_max_iter", integer(&RunConfig::bisect_max_iter)},
      {"with_omega", boolean(&RunConfig::with_omega)},
      {"with_operator_form", boolean(&RunConfig::with_operator_form)},
      // spectrum
      {"well",
       [](RunConfig& rc, const std::string& w, const std::string& k,
          const std::string& v) {
         if (v != "double" && v != "single" && v != "free" && v != "sho")
           bad_value(w, k, v, "double|single|free|sho");
         rc.well = v;
       }},
      {"sho_omega", dbl(&RunConfig::sho_omega)},
      // sweep
      {"ybar_list", list(&RunConfig::ybar_list)},
      {"ybar_min", dbl(&RunConfig::ybar_min)},
      {"ybar_max", dbl(&RunConfig::ybar_max)},
      {"ybar_count", integer(&RunConfig::ybar_count)},
      // find-degeneracy
      {"bracket_lo",
       [](RunConfig& rc, const std::string& w, const std::string& k,
          const std::string& v) { rc.bracket_lo = parse_double(w, k, v); }},
      {"bracket_hi",
       [](RunConfig& rc, const std::string& w, const std::string& k,
          const std::string& v) { rc.bracket_hi = parse_double(w, k, v); }},
      // decay-fit
      {"annulus_r1", dbl(&RunConfig::annulus_r1)},
      {"annulus_r2", dbl(&RunConfig::annulus_r2)},
      {"decay_support", dbl(&RunConfig::decay_support)},
      // kernel-check
      {"series_max_terms", integer(&RunConfig::series_max_terms)},
      {"series_rtol", dbl(&RunConfig::series_rtol)},
      {"kernel_z_fracs", list(&RunConfig::kernel_z_fracs)},
      {"kernel_radii", list(&RunConfig::kernel_radii)},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_sibling(const std::string& path) {
  constexpr const char* kExt = ".json";
  if (path.size() > 5 && path.compare(path.size() - 5, 5, kExt) == 0)
    return path.substr(0, path.size() - 5) + ".csv";
  return path + ".csv";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << text;
  f.close();
  if (!f) throw ConfigError("failed writing output file '" + path + "'");
}

ordered_json base_report(const char* command, const RunConfig& rc,
                         const CliOptions& opt) {
  ordered_json j;
  j["tool"] = "magdwell";
  j["version"] = kMagdwellVersion;
  j["command"] = command;
  if (!opt.no_timestamp) j["timestamp"] = utc_now();
  j["config"] = config_echo(rc);
  return j;
}

// JSON to stdout when no --output; otherwise files plus a short human block.
void emit(const ordered_json& doc, const CliOptions& opt, std::ostream& out,
          const std::string* csv, const std::string& human) {
  const std::string text = doc.dump(2) + "\n";
  if (opt.output.empty()) {
    out << text;
    return;
  }
  write_file(opt.output, text);
  if (csv) write_file(csv_sibling(opt.output), *csv);
  out << human;
  out << "report: " << opt.output << "\n";
  if (csv) out << "table: " << csv_sibling(opt.output) << "\n";
}

int run_guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

ModelParams model_of(const RunConfig& rc) {
  ModelParams p;
  p.lambda = rc.lambda;
  p.M = rc.M;
  p.D = rc.D;
  p.ybar = rc.ybar;
  p.nu_max = rc.nu_max;
  p.r0 = rc.r0;
  return p;
}

DeskOverrides overrides_of(const RunConfig& rc) {
  DeskOverrides o;
  o.delta = rc.delta;
  o.tau = rc.tau;
  o.d1 = rc.d1;
  return o;
}

std::vector<double> sweep_points(const RunConfig& rc) {
  if (!rc.ybar_list.empty()) return rc.ybar_list;
  if (rc.ybar_count < 1)
    throw ConfigError(
        "sweep: ybar_count must be >= 1 (or provide a ybar_list)");
  if (rc.ybar_count == 1) return {rc.ybar_min};
  std::vector<double> ys;
  ys.reserve(rc.ybar_count);
  for (int i = 0; i < rc.ybar_count; ++i)
    ys.push_back(rc.ybar_min + (rc.ybar_max - rc.ybar_min) * i /
                                   (rc.ybar_count - 1));
  return ys;
}

double parity_expectation(const GridField& v) {
  return inner(v, parity(v)).real();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

RunConfig parse_run_config(std::istream& in, const std::string& source) {
  RunConfig rc;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key=value, got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError(where + ": unknown key '" + key + "'");
    const auto dup = seen.find(key);
    if (dup != seen.end())
      throw ConfigError(where + ": duplicate key '" + key + "' (first set at line " +
                        std::to_string(dup->second) + ")");
    seen.emplace(key, lineno);
    it->second(rc, where, key, value);
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return parse_run_config(f, path);
}

Grid2D make_grid(const RunConfig& rc) {
  if (rc.n && rc.L) return Grid2D(*rc.n, *rc.L);
  const DerivedParams dp = derive_parameters(model_of(rc), overrides_of(rc));
  const double h_field = 0.35 / std::sqrt(rc.lambda);
  const double h = dp.delta >= 0.02 ? std::min(h_field, dp.delta / 3.0) : h_field;
  const double L = rc.L ? *rc.L : dp.d1 + rc.D + 1.0 + 6.0 / std::sqrt(rc.lambda);
  int n;
  if (rc.n) {
    n = *rc.n;
  } else {
    n = static_cast<int>(std::ceil(2.0 * L / h)) + 1;
    if (n % 2 == 0) ++n;
  }
  return Grid2D(n, L);
}

SystemConfig to_system_config(const RunConfig& rc) {
  SystemConfig cfg;
  cfg.params = model_of(rc);
  cfg.overrides = overrides_of(rc);
  cfg.gauge = rc.gauge_on ? GaugePhases::on : GaugePhases::off;
  return cfg;
}

SolveRequest to_solve_request(const RunConfig& rc) {
  SolveRequest req;
  req.tol = rc.tol;
  req.max_iter = rc.max_iter;
  req.k = rc.k;
  req.seed = rc.seed;
  req.gauge = rc.gauge_on ? GaugePhases::on : GaugePhases::off;
  req.bisect_width = rc.bisect_width;
  req.bisect_max_iter = rc.bisect_max_iter;
  req.with_omega = rc.with_omega;
  req.with_operator_form = rc.with_operator_form;
  return req;
}

ordered_json config_echo(const RunConfig& rc) {
  ordered_json j;
  j["lambda"] = rc.lambda;
  j["M"] = rc.M;
  j["D"] = rc.D;
  j["ybar"] = rc.ybar;
  j["nu_max"] = rc.nu_max;
  j["r0"] = rc.r0;
  j["delta"] = rc.delta ? ordered_json(*rc.delta) : ordered_json("formula");
  j["tau"] = rc.tau ? ordered_json(*rc.tau) : ordered_json("formula");
  j["d1"] = rc.d1 ? ordered_json(*rc.d1) : ordered_json("formula");
  j["n"] = rc.n ? ordered_json(*rc.n) : ordered_json("auto");
  j["L"] = rc.L ? ordered_json(*rc.L) : ordered_json("auto");
  j["k"] = rc.k;
  j["tol"] = rc.tol;
  j["max_iter"] = rc.max_iter;
  j["seed"] = rc.seed;
  j["gauge"] = rc.gauge_on ? "on" : "off";
  j["bisect_width"] = rc.bisect_width;
  j["bisect_max_iter"] = rc.bisect_max_iter;
  j["with_omega"] = rc.with_omega;
  j["with_operator_form"] = rc.with_operator_form;
  j["well"] = rc.well;
  j["sho_omega"] = rc.sho_omega;
  j["ybar_list"] = rc.ybar_list;
  j["ybar_min"] = rc.ybar_min;
  j["ybar_max"] = rc.ybar_max;
  j["ybar_count"] = rc.ybar_count;
  j["bracket_lo"] = rc.bracket_lo ? ordered_json(*rc.bracket_lo) : ordered_json();
  j["bracket_hi"] = rc.bracket_hi ? ordered_json(*rc.bracket_hi) : ordered_json();
  j["annulus_r1"] = rc.annulus_r1;
  j["annulus_r2"] = rc.annulus_r2;
  j["decay_support"] = rc.decay_support;
  j["series_max_terms"] = rc.series_max_terms;
  j["series_rtol"] = rc.series_rtol;
  j["kernel_z_fracs"] = rc.kernel_z_fracs;
  j["kernel_radii"] = rc.kernel_radii;
  return j;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_derive_params(const RunConfig& rc, const CliOptions& opt,
                      std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const ModelParams mp = model_of(rc);
    const DerivedParams dp = derive_parameters(mp, overrides_of(rc));
    const OrderingReport ord = check_ordering(mp, dp);
    const Grid2D grid = make_grid(rc);
    const double d1s = snap_separation(dp.d1, grid);

    ordered_json j = base_report("derive-params", rc, opt);
    j["model"] = json_of(mp);
    j["derived"] = json_of(dp);
    j["derived"]["d1_snapped"] = d1s;
    j["grid"] = {{"n", grid.n}, {"L", grid.half_width}, {"h", grid.spacing}};
    j["ordering"] = json_of(ord);

    std::ostringstream hs;
    hs << "model: lambda=" << fmt17(mp.lambda) << " M=" << fmt17(mp.M)
       << " D=" << fmt17(mp.D) << " ybar=" << fmt17(mp.ybar)
       << " nu_max=" << mp.nu_max << " r0=" << fmt17(mp.r0) << "\n";
    hs << "delta = " << fmt17(dp.delta) << "  (log " << fmt17(dp.log_delta)
       << (rc.delta ? ", override)" : ", formula)") << "\n";
    hs << "tau   = " << fmt17(dp.tau) << "  (log " << fmt17(dp.log_tau)
       << (rc.tau ? ", override)" : ", formula)") << "\n";
    hs << "d1    = " << fmt17(dp.d1) << " exact, " << fmt17(d1s)
       << " snapped (grid n=" << grid.n << " L=" << fmt17(grid.half_width)
       << " h=" << fmt17(grid.spacing) << ")\n";
    hs << "centers:";
    for (const Point2& c : dp.centers)
      hs << " (" << fmt17(c.x) << ", " << fmt17(c.y) << ")";
    hs << "\n";
    hs << "ordering: separation_ratio=" << fmt17(ord.separation_ratio)
       << " well_separated=" << (ord.well_separated ? "yes" : "no")
       << " log(tau*delta^2)=" << fmt17(ord.log_tau_delta_sq) << " window=("
       << fmt17(ord.window_lo_log) << ", " << fmt17(ord.window_hi_log)
       << ") inside=" << (ord.inside_window ? "yes" : "no") << "\n";
    hs << "verdict: " << ord.verdict << "\n";

    emit(j, opt, out, nullptr, hs.str());
    return 0;
  });
}

int cmd_kernel_check(const RunConfig& rc, const CliOptions& opt,
                     std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const double omega = rc.lambda;
    if (!(omega > 0.0))
      throw ConfigError("kernel-check: lambda must be positive");
    std::vector<double> radii = rc.kernel_radii;
    if (radii.empty())
      for (double u : {0.2, 0.8, 2.0, 4.5, 7.5})
        radii.push_back(std::sqrt(2.0 * u / omega));

    ordered_json samples = ordered_json::array();
    ordered_json skipped = ordered_json::array();
    int violations = 0;
    double max_excess = 0.0, max_rel = 0.0;
    constexpr double kLogSlack = 1e-9;
    for (double frac : rc.kernel_z_fracs) {
      if (frac >= 1.0) {
        skipped.push_back(
            {{"z_frac", frac},
             {"note", "z >= omega lies outside the resolvent set; skipped"}});
        continue;
      }
      const double z = frac * omega;
      for (double r : radii) {
        const KernelQuery q{omega, z, {r, 0.0}};
        const double logK = sho_resolvent_kernel_log(q);
        const KernelBounds b = kernel_bounds(q);
        const double excess =
            std::max(b.log_lower - logK, logK - b.log_upper);
        const double K = std::exp(logK);
        const double Ks = sho_resolvent_series(omega, z, r, rc.series_max_terms);
        const double rel = std::abs(K - Ks) / std::abs(K);
        const bool ok = excess <= kLogSlack && rel <= rc.series_rtol;
        violations += ok ? 0 : 1;
        max_excess = std::max(max_excess, excess);
        max_rel = std::max(max_rel, rel);
        samples.push_back({{"omega", omega},
                           {"z", z},
                           {"r", r},
                           {"log_kernel", logK},
                           {"log_lower", b.log_lower},
                           {"log_upper", b.log_upper},
                           {"bound_excess", excess},
                           {"series", Ks},
                           {"series_rel_err", rel},
                           {"ok", ok}});
      }
    }

    ordered_json j = base_report("kernel-check", rc, opt);
    j["samples"] = std::move(samples);
    j["skipped"] = std::move(skipped);
    j["violations"] = violations;
    j["max_log_bound_excess"] = max_excess;
    j["max_series_rel_err"] = max_rel;

    std::ostringstream hs;
    hs << "kernel check: " << j["samples"].size() << " samples, " << violations
       << " violations\n";
    hs << "max log-bound excess: " << fmt17(max_excess)
       << "  max series rel err: " << fmt17(max_rel) << "\n";
    emit(j, opt, out, nullptr, hs.str());
    if (violations > 0)
      err << "kernel check failed: " << violations << " violating samples\n";
    return violations > 0 ? 1 : 0;
  });
}

int cmd_spectrum(const RunConfig& rc, const CliOptions& opt, std::ostream& out,
                 std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const Grid2D grid = make_grid(rc);
    const GaugePhases gauge = rc.gauge_on ? GaugePhases::on : GaugePhases::off;

    MagneticOperator op;
    ordered_json sysj;
    if (rc.well == "free") {
      op = build_operator(grid, rc.lambda, gauge);
    } else if (rc.well == "sho") {
      const double w = rc.sho_omega;
      op = build_operator(
          grid, rc.lambda,
          [w](Point2 p) { return w * w * norm2(p) / 4.0; }, gauge);
    } else {
      const ResolvedSystem sys = resolve_system(to_system_config(rc), grid);
      op = build_operator(
          rc.well == "single" ? sys.single_spec : sys.dw_spec, grid, gauge);
      sysj["d1_snapped"] = sys.derived.d1;
      sysj["delta"] = sys.derived.delta;
      sysj["tau"] = sys.derived.tau;
      sysj["moderate_regime"] = sys.derived.moderate_regime;
    }

    EigensolveOptions eo;
    eo.k = rc.k;
    eo.tol = rc.tol;
    eo.max_iter = rc.max_iter;
    eo.seed = rc.seed;
    const EigensolveResult res = lowest_eigenpairs(op, eo);
    std::vector<double> parities;
    parities.reserve(res.vectors.size());
    for (const GridField& v : res.vectors)
      parities.push_back(parity_expectation(v));

    ordered_json j = base_report("spectrum", rc, opt);
    j["well"] = rc.well;
    j["grid"] = {{"n", grid.n}, {"L", grid.half_width}, {"h", grid.spacing}};
    if (!sysj.is_null()) j["system"] = std::move(sysj);
    j["operator"] = {{"parity_symmetric", op.parity_symmetric},
                     {"mirror_symmetric", op.mirror_symmetric},
                     {"gauge_on", rc.gauge_on}};
    j["values"] = res.values;
    j["residuals"] = res.residuals;
    j["parities"] = parities;
    j["iterations"] = res.iterations;
    j["converged"] = res.converged;

    std::ostringstream hs;
    hs << "spectrum (" << rc.well << " well, n=" << grid.n << "):";
    for (double v : res.values) hs << " " << fmt17(v);
    hs << "\n";

    if (rc.well == "double" && res.values.size() >= 2) {
      EigensolveOptions so = eo;
      so.k = 1;
      so.warm_start = res.vectors;
      so.sector = ParitySector::even;
      const EigensolveResult even = lowest_eigenpairs(op, so);
      so.sector = ParitySector::odd;
      const EigensolveResult odd = lowest_eigenpairs(op, so);
      const double S = odd.values[0] - even.values[0];
      const double Delta = res.values[1] - res.values[0];
      j["E_even"] = even.values[0];
      j["E_odd"] = odd.values[0];
      j["S"] = S;
      j["Delta"] = Delta;
      j["Delta_minus_absS"] = Delta - std::abs(S);
      hs << "Delta = " << fmt17(Delta) << "  S = " << fmt17(S)
         << "  Delta - |S| = " << fmt17(Delta - std::abs(S)) << "\n";
    }

    const std::string csv = spectrum_csv(res, parities);
    emit(j, opt, out, &csv, hs.str());
    return 0;
  });
}

int cmd_sweep(const RunConfig& rc, const CliOptions& opt, std::ostream& out,
              std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const std::vector<double> ys = sweep_points(rc);
    const Grid2D grid = make_grid(rc);
    const SweepSummary sw =
        sweep_ybar(to_system_config(rc), grid, ys, to_solve_request(rc),
                   opt.jobs);
    const int total = static_cast<int>(sw.points.size());
    const int ok = total - sw.failures;

    ordered_json j = base_report("sweep", rc, opt);
    j["grid"] = {{"n", grid.n}, {"L", grid.half_width}, {"h", grid.spacing}};
    const ordered_json swj = json_of(sw);
    for (const auto& [key, value] : swj.items()) j[key] = value;
    j["points_total"] = total;
    j["points_ok"] = ok;

    const std::string csv = sweep_csv(sw);
    std::ostringstream hs;
    hs << "sweep: " << ok << "/" << total << " points ok, "
       << sw.zero_crossings.size() << " sign changes";
    if (!sw.zero_crossings.empty()) {
      hs << " at";
      for (double zc : sw.zero_crossings) hs << " " << fmt17(zc);
    }
    hs << "\n";
    emit(j, opt, out, &csv, hs.str());
    if (10 * ok >= 9 * total) return 0;
    err << "sweep failed: only " << ok << "/" << total
        << " points succeeded (threshold 90%)\n";
    return 1;
  });
}

int cmd_find_degeneracy(const RunConfig& rc, const CliOptions& opt,
                        std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    if (!rc.bracket_lo || !rc.bracket_hi)
      throw ConfigError(
          "find-degeneracy requires bracket_lo and bracket_hi (take them from "
          "a sweep's sign change)");
    const Grid2D grid = make_grid(rc);
    const DegeneracySearch ds =
        find_degeneracy(to_system_config(rc), grid,
                        {*rc.bracket_lo, *rc.bracket_hi}, to_solve_request(rc));

    ordered_json j = base_report("find-degeneracy", rc, opt);
    j["grid"] = {{"n", grid.n}, {"L", grid.half_width}, {"h", grid.spacing}};
    const ordered_json dsj = json_of(ds);
    for (const auto& [key, value] : dsj.items()) j[key] = value;

    std::ostringstream hs;
    hs << "ystar = " << fmt17(ds.ystar) << "  (evaluations " << ds.evaluations
       << ", final width " << fmt17(ds.final_width)
       << (ds.tol_met ? ", splitting tolerance met" : "") << ")\n";
    hs << "S(ystar) = " << fmt17(ds.at_star.S)
       << "  Delta(ystar) = " << fmt17(ds.at_star.Delta) << "\n";
    hs << "parity0: " << fmt17(ds.at_lo.parity0) << " at ybar=" << fmt17(ds.at_lo.ybar)
       << "  ->  " << fmt17(ds.at_hi.parity0) << " at ybar=" << fmt17(ds.at_hi.ybar)
       << "\n";
    emit(j, opt, out, nullptr, hs.str());
    return 0;
  });
}

int cmd_decay_fit(const RunConfig& rc, const CliOptions& opt, std::ostream& out,
                  std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const Grid2D grid = make_grid(rc);
    const ResolvedSystem sys = resolve_system(to_system_config(rc), grid);
    const WellStates ws =
        single_well_ground(sys.single_spec, grid, to_solve_request(rc));
    DecayFit fit;
    try {
      fit = gaussian_decay_fit(ws.phi, rc.decay_support,
                               {rc.annulus_r1, rc.annulus_r2});
    } catch (const std::invalid_argument& e) {
      if (std::string(e.what()).find("too few samples") != std::string::npos) {
        err << "insufficient samples: " << e.what() << "\n";
        return 1;
      }
      throw;
    }
    const double reference = -rc.lambda / 4.0;
    const double rel_gap = std::abs(fit.slope - reference) / std::abs(reference);

    ordered_json j = base_report("decay-fit", rc, opt);
    j["grid"] = {{"n", grid.n}, {"L", grid.half_width}, {"h", grid.spacing}};
    j["fit"] = json_of(fit);
    j["annulus"] = {rc.annulus_r1, rc.annulus_r2};
    j["support_radius"] = rc.decay_support;
    j["reference_slope"] = reference;
    j["slope_rel_gap"] = rel_gap;
    j["e_lambda"] = ws.e;
    j["solver_converged"] = ws.converged;

    std::ostringstream hs;
    hs << "decay slope = " << fmt17(fit.slope) << "  reference -lambda/4 = "
       << fmt17(reference) << "  rel gap = " << fmt17(rel_gap) << "  ("
       << fit.samples << " samples)\n";
    emit(j, opt, out, nullptr, hs.str());
    return 0;
  });
}

}  // namespace magdwell
