// magdwell: spectral laboratory for magnetic double wells.
//
//   magdwell <subcommand> [config-file] [--output path] [--jobs N]
//                         [--no-timestamp]
//
// Subcommands: derive-params, kernel-check, spectrum, sweep, find-degeneracy,
// decay-fit.  Without a config file every subcommand runs the standard preset
// (lambda=6, D=2, delta=0.05, tau=1e-3, n=241, L=9).  Exit codes: 0 success,
// 1 numerical check failed, 2 usage or config error.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "magdwell/cli.hpp"

namespace {

struct SubSpec {
  const char* name;
  const char* help;
  int (*fn)(const magdwell::RunConfig&, const magdwell::CliOptions&,
            std::ostream&, std::ostream&);
  bool has_jobs;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magdwell: magnetic double-well spectral laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(magdwell::kMagdwellVersion));

  const SubSpec specs[] = {
      {"derive-params",
       "Resolve desk-scale parameters, well centers, and the ordering window",
       &magdwell::cmd_derive_params, false},
      {"kernel-check",
       "Sandwich the oscillator resolvent kernel between closed-form bounds",
       &magdwell::cmd_kernel_check, false},
      {"spectrum", "Lowest eigenvalues of a free/sho/single/double-well run",
       &magdwell::cmd_spectrum, false},
      {"sweep", "Splitting and hopping amplitude across a list of ybar values",
       &magdwell::cmd_sweep, true},
      {"find-degeneracy",
       "Bisect a sign change of the splitting to locate a degeneracy",
       &magdwell::cmd_find_degeneracy, false},
      {"decay-fit", "Fit the Gaussian decay slope of the planet ground state",
       &magdwell::cmd_decay_fit, false},
  };

  std::string config_path;
  magdwell::CliOptions opt;
  const SubSpec* chosen = nullptr;

  for (const SubSpec& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("config", config_path,
                    "Flat key=value config file ('#' comments); omit for the "
                    "standard preset");
    sub->add_option("--output", opt.output,
                    "Write the JSON report here (and any CSV table next to "
                    "it); default prints JSON to stdout");
    if (s.has_jobs)
      sub->add_option("--jobs", opt.jobs, "Concurrent solves for sweeps")
          ->check(CLI::PositiveNumber);
    sub->add_flag("--no-timestamp", opt.no_timestamp,
                  "Omit the timestamp for byte-reproducible reports");
    sub->callback([&chosen, sp = &s]() { chosen = sp; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  magdwell::RunConfig rc;
  if (!config_path.empty()) {
    try {
      rc = magdwell::load_run_config(config_path);
    } catch (const magdwell::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }
  return chosen->fn(rc, opt, std::cout, std::cerr);
}
