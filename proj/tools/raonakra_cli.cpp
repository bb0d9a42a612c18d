// Command line front end: simulate, sweep, fit, check-identity.
//
// Exit codes: 0 success, 1 run or I/O failure, 2 config or usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "raonakra/io.hpp"

namespace fs = std::filesystem;
using namespace raonakra;

namespace {

constexpr int kOk = 0;
constexpr int kRunFailure = 1;
constexpr int kConfigError = 2;

struct Options {
  std::string config;
  std::string csv;
  std::string out_dir;
  double t_min = 0.0;
  double tol = 1e-9;
  bool dry_run = false;
};

fs::path resolve_out(const Options &opt, const RunConfig &rc) {
  return opt.out_dir.empty() ? fs::path(rc.out_dir) : fs::path(opt.out_dir);
}

void print_fit(const DecayFit &f) {
  std::printf("fit: C = %.6g  p = %.6g  rms = %.3g  window = [%g, %g]  samples = %zu\n", f.c_const, f.p_rate,
              f.residual, f.t_min, f.t_max, f.samples);
}

int cmd_simulate(const Options &opt) {
  const ParsedConfig cfg = load_config(opt.config);
  if (!std::holds_alternative<RunConfig>(cfg)) {
    std::cerr << "error: " << opt.config << " is a sweep config; use 'sweep'\n";
    return kConfigError;
  }
  const RunConfig &rc = std::get<RunConfig>(cfg);
  if (opt.dry_run) {
    std::cout << dump_config(cfg);
    return kOk;
  }
  const fs::path out = resolve_out(opt, rc);
  const RunOutputs o = run_and_write(rc, out);
  std::printf("backend %s: %zu steps, E0 = %.10g, E_T = %.10g, max |dE - predicted| = %.3e\n",
              to_string(rc.sim.backend), rc.sim.tgrid.n_steps(), o.result.initial_energy,
              o.result.series.back().energy.total, o.result.max_identity_residual);
  if (o.fit)
    print_fit(*o.fit);
  else
    std::printf("fit: skipped (%s)\n", o.fit_error.c_str());
  for (const auto &f : o.files) std::printf("wrote %s\n", f.string().c_str());
  return kOk;
}

int cmd_sweep(const Options &opt) {
  const ParsedConfig cfg = load_config(opt.config);
  if (!std::holds_alternative<SweepConfig>(cfg)) {
    std::cerr << "error: " << opt.config << " is a single-run config; use 'simulate'\n";
    return kConfigError;
  }
  const SweepConfig &sw = std::get<SweepConfig>(cfg);
  if (opt.dry_run) {
    std::cout << dump_config(cfg);
    return kOk;
  }
  const fs::path out = resolve_out(opt, sw.base);
  const SweepSummary s = run_sweep(sw, out);
  for (const auto &r : s.rows)
    std::printf("alpha %-6g eta %-8g p %-10.5g C %-10.5g %6.1fs  %s\n", r.alpha, r.eta, r.p_rate, r.c_const,
                r.runtime_s, r.status.c_str());
  std::printf("wrote %s\n", (out / "sweep_summary.csv").string().c_str());
  return s.all_ok() ? kOk : kRunFailure;
}

int cmd_fit(const Options &opt) {
  const TimeSeries series = read_energy_csv(opt.csv);
  print_fit(fit_power_law(series, opt.t_min));
  return kOk;
}

int cmd_check_identity(const Options &opt) {
  const ParsedConfig cfg = load_config(opt.config);
  if (!std::holds_alternative<RunConfig>(cfg)) {
    std::cerr << "error: check-identity needs a single-run config\n";
    return kConfigError;
  }
  const RunConfig &rc = std::get<RunConfig>(cfg);
  if (opt.dry_run) {
    std::cout << dump_config(cfg);
    return kOk;
  }
  const SimulationResult r = run_simulation(rc.sim);
  const double rel = r.initial_energy > 0.0 ? r.max_identity_residual / r.initial_energy : r.max_identity_residual;
  const MonotonicityReport m = monotonicity_report(r.series);
  std::printf("backend %s: max |dE - predicted| = %.3e (relative to E0: %.3e), tolerance %.1e\n",
              to_string(rc.sim.backend), r.max_identity_residual, rel, opt.tol);
  std::printf("monotonicity: %zu increases, largest step change %.3e\n", m.violations, m.max_increase);
  const bool ok = rel <= opt.tol;
  std::printf("%s\n", ok ? "identity holds" : "identity violated");
  return ok ? kOk : kRunFailure;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Rao-Nakra beam with fractional damping"};
  app.require_subcommand(1);
  Options opt;
  app.add_flag("--dry-run", opt.dry_run, "Print the resolved config and exit");
  app.add_option("--out-dir", opt.out_dir, "Output directory (overrides output.directory)");

  auto *sim = app.add_subcommand("simulate", "Run one config and write CSV output");
  sim->add_option("config", opt.config, "Config file")->required();
  auto *sweep = app.add_subcommand("sweep", "Run an (alpha, eta) sweep and fit each energy curve");
  sweep->add_option("config", opt.config, "Config file")->required();
  auto *fit = app.add_subcommand("fit", "Fit C (1 + t)^p to an energy CSV");
  fit->add_option("csv", opt.csv, "energy.csv")->required();
  fit->add_option("--tmin", opt.t_min, "Discard samples with t < tmin")->required();
  auto *chk = app.add_subcommand("check-identity", "Run and report the largest per-step energy-balance residual");
  chk->add_option("config", opt.config, "Config file")->required();
  chk->add_option("--tol", opt.tol, "Relative tolerance (default 1e-9)");
  for (auto *sc : {sim, sweep, chk}) {
    sc->add_flag("--dry-run", opt.dry_run, "Print the resolved config and exit");
    sc->add_option("--out-dir", opt.out_dir, "Output directory (overrides output.directory)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return cmd_simulate(opt);
    if (*sweep) return cmd_sweep(opt);
    if (*fit) return cmd_fit(opt);
    if (*chk) return cmd_check_identity(opt);
  } catch (const ConfigParseError &e) {
    std::cerr << "config error:\n" << e.what();
    return kConfigError;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const SimulationError &e) {
    std::cerr << "run failed at step " << e.step() << ": " << e.what() << "\n";
    return kRunFailure;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunFailure;
  }
  return kConfigError;
}
