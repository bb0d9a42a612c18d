// Acceptance harness: one PASS/FAIL line per criterion.
//
// Exit status is 0 once every criterion has been evaluated, whatever the
// verdicts; --strict turns any FAIL into exit status 1.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "raonakra/io.hpp"

namespace fs = std::filesystem;
using namespace raonakra;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  int id;
  bool pass;
  std::string summary;
};

std::vector<Verdict> verdicts;

void report(int id, bool pass, const std::string &summary) {
  verdicts.push_back({id, pass, summary});
  std::printf("[%s] %d. %s\n", pass ? "PASS" : "FAIL", id, summary.c_str());
  std::fflush(stdout);
}

std::string fmt(const char *f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char *f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void note(const std::string &s) {
  std::printf("      %s\n", s.c_str());
  std::fflush(stdout);
}

// reference beam, (CI) data, J = 100
SimulationConfig base_config(Backend b, double dt, std::size_t steps) {
  SimulationConfig c;
  c.backend = b;
  c.j_count = 100;
  c.tgrid = TimeGrid(dt, steps);
  return c;
}

// reference decay rates p by (eta, alpha)
const std::map<std::pair<double, double>, double> kReferenceRates = {
    {{0.0, 0.25}, -0.4136},  {{0.0, 0.5}, -0.7497},   {{0.0, 0.75}, -0.9147},   {{0.0, 0.99}, -0.7968},
    {{1e-4, 0.25}, -0.8630}, {{1e-4, 0.5}, -0.9773},  {{1e-4, 0.75}, -0.9255},  {{1e-4, 0.99}, -0.7968},
    {{3e-4, 0.25}, -1.2750}, {{3e-4, 0.5}, -1.0469},  {{3e-4, 0.75}, -0.9266},  {{3e-4, 0.99}, -0.7968},
    {{1e-3, 0.25}, -1.1394}, {{1e-3, 0.5}, -0.9985},  {{1e-3, 0.75}, -0.9236},  {{1e-3, 0.99}, -0.7968},
    {{0.1, 0.25}, -0.9431},  {{0.1, 0.5}, -0.9514},   {{0.1, 0.75}, -0.9190},   {{0.1, 0.99}, -0.7955},
    {{0.3, 0.25}, -0.9404},  {{0.3, 0.5}, -0.9485},   {{0.3, 0.75}, -0.9161},   {{0.3, 0.99}, -0.7925},
};

// decay-study run: J = 100, dt = 0.1, T = 2000, xi_max = 1e4, fit on t >= 200
RunConfig decay_config(double alpha, double eta, std::size_t m) {
  RunConfig rc;
  rc.sim = base_config(Backend::mbodje, 0.1, 20000);
  rc.sim.frac = FractionalParams(alpha, eta);
  rc.sim.xi.xi_max = 1.0e4;
  rc.sim.xi.m_count = m;
  rc.sim.record_stride = 10;
  rc.fit_t_min = 200.0;
  return rc;
}

double decay_rate(double alpha, double eta, std::size_t m) {
  const RunConfig rc = decay_config(alpha, eta, m);
  return fit_power_law(run_simulation(rc.sim).series, rc.fit_t_min).p_rate;
}

void criterion_1() {
  const auto t0 = Clock::now();
  SimulationConfig c = base_config(Backend::undamped, 0.01, 10000);
  c.record_stride = 100;
  const SimulationResult r = run_simulation(c);
  const double e0 = r.series.front().energy.total, en = r.series.back().energy.total;
  const double drift = std::abs(en - e0) / e0;
  const double secs = seconds_since(t0);
  report(1, drift <= 1e-10 && secs <= 30.0,
         fmt("undamped conservation: |E_N - E_0|/E_0 = %.3e (limit 1e-10), E_0 = %.10g, %.1f s (limit 30 s)", drift,
             e0, secs));
}

void criteria_2_3(std::size_t m) {
  double worst_rel = 0.0, worst_secs = 0.0;
  std::size_t total_violations = 0;
  for (double alpha : {0.25, 0.5, 0.75})
    for (double eta : {0.0, 0.3}) {
      const auto t0 = Clock::now();
      SimulationConfig c = base_config(Backend::mbodje, 0.05, 2000);
      c.frac = FractionalParams(alpha, eta);
      c.xi.xi_max = 1.0e4;
      c.xi.m_count = m;
      const SimulationResult r = run_simulation(c);
      const double secs = seconds_since(t0);
      const double rel = r.max_identity_residual / r.initial_energy;
      const MonotonicityReport mr = monotonicity_report(r.series, 1e-12);
      note(fmt("alpha %.2f eta %.1f: max |dE - D|/E0 = %.3e, violations %zu, E_T/E_0 = %.6f, %.1f s", alpha, eta, rel,
               mr.violations, r.series.back().energy.total / r.initial_energy, secs));
      worst_rel = std::max(worst_rel, rel);
      worst_secs = std::max(worst_secs, secs);
      total_violations += mr.violations;
    }
  report(2, worst_rel <= 1e-9 && worst_secs <= 60.0,
         fmt("per-step energy identity, 6 configs, M = %zu: worst residual/E0 = %.3e (limit 1e-9), slowest %.1f s "
             "(limit 60 s)",
             m, worst_rel, worst_secs));
  report(3, total_violations == 0,
         fmt("monotone decay on the same runs: %zu violations at slack 1e-12 (required 0)", total_violations));
}

void criterion_4(std::size_t m) {
  std::string found;
  double max_increase_gl = -INFINITY;
  for (double dt : {0.5, 0.25, 0.1}) {
    const std::size_t steps = static_cast<std::size_t>(std::llround(100.0 / dt));
    SimulationConfig g = base_config(Backend::grunwald_letnikov, dt, steps);
    g.frac = FractionalParams(0.5, 0.0);
    SimulationConfig mb = g;
    mb.backend = Backend::mbodje;
    mb.xi.xi_max = 1.0e4;
    mb.xi.m_count = m;
    const SimulationResult rg = run_simulation(g);
    const SimulationResult rm = run_simulation(mb);
    const MonotonicityReport a = monotonicity_report(rg.series, 1e-12);
    const MonotonicityReport b = monotonicity_report(rm.series, 1e-12);
    max_increase_gl = std::max(max_increase_gl, a.max_increase);
    note(fmt("dt = %.2f: GL violations %zu (largest increase %.3e, first at t = %g), Mbodje violations %zu", dt,
             a.violations, a.max_increase, a.indices.empty() ? -1.0 : rg.series[a.indices[0]].t, b.violations));
    if (found.empty() && a.violations >= 1 && b.violations == 0) found = fmt("%.2f", dt);
  }
  report(4, !found.empty(),
         found.empty() ? fmt("GL/Mbodje contrast: no dt in {0.5, 0.25, 0.1} separates them; largest GL increase %.3e",
                             max_increase_gl)
                       : "GL/Mbodje contrast: at dt = " + found +
                             " the GL energy increases at least once while the Mbodje energy is monotone");
}

std::size_t resolution_study() {
  // halve dxi (double M at xi_max = 1e4) until the fitted rate moves by < 0.005
  const std::vector<std::pair<double, double>> probes = {{0.5, 0.3}, {0.25, 0.0}};
  std::size_t m = 250;
  std::vector<double> prev;
  for (const auto &pr : probes) prev.push_back(decay_rate(pr.first, pr.second, m));
  note(fmt("resolution study M = %zu (dxi = %g): p = %.5f, %.5f", m, 1.0e4 / double(m), prev[0], prev[1]));
  while (m < 16000) {
    const std::size_t next = 2 * m;
    std::vector<double> cur;
    double change = 0.0;
    for (std::size_t k = 0; k < probes.size(); ++k) {
      cur.push_back(decay_rate(probes[k].first, probes[k].second, next));
      change = std::max(change, std::abs(cur[k] - prev[k]));
    }
    note(fmt("resolution study M = %zu (dxi = %g): p = %.5f, %.5f, max |dp| = %.5f", next, 1.0e4 / double(next),
             cur[0], cur[1], change));
    if (change < 0.005) return next;
    m = next;
    prev = cur;
  }
  return m;
}

void criteria_5_6(std::size_t m, const fs::path &out) {
  const auto t0 = Clock::now();
  SweepConfig sw;
  sw.base = decay_config(0.5, 0.0, m);
  sw.alphas = {0.25, 0.5, 0.75, 0.99};
  sw.etas = {0.0, 1e-3, 0.1, 0.3};
  sw.record_runtime = true;
  const SweepSummary s = run_sweep(sw, out / "decay_sweep");
  const double secs = seconds_since(t0);
  std::size_t within = 0;
  double worst = 0.0;
  note("  alpha      eta        p      target    |diff|   runtime");
  for (const auto &r : s.rows) {
    const double target = kReferenceRates.at({r.eta, r.alpha});
    const double d = std::abs(r.p_rate - target);
    worst = std::max(worst, std::isnan(d) ? INFINITY : d);
    if (d <= 0.2) ++within;
    note(fmt("  %-6g %-8g %9.5f %9.4f %9.4f %7.1fs  C = %.4g  %s", r.alpha, r.eta, r.p_rate, target, d, r.runtime_s,
             r.c_const, r.status.c_str()));
  }
  report(5, within == s.rows.size() && secs <= 1800.0,
         fmt("reference decay rates, M = %zu: %zu/%zu within +-0.2 of the target, worst |diff| = %.3f, sweep %.0f s (limit "
             "1800 s)",
             m, within, s.rows.size(), worst, secs));

  const auto t1 = Clock::now();
  double p_hi = NAN;
  for (const auto &r : s.rows)
    if (r.alpha == 0.99 && r.eta == 0.3) p_hi = r.p_rate;
  const double p_lo = decay_rate(0.99, 1e-4, m);
  const double spread = std::abs(p_hi - p_lo);
  report(6, spread <= 0.05,
         fmt("alpha = 0.99 eta-insensitivity: p(eta=1e-4) = %.5f, p(eta=0.3) = %.5f, spread %.5f (limit 0.05), "
             "%.1f s extra",
             p_lo, p_hi, spread, seconds_since(t1)));
}

void criterion_7() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double alpha : {0.25, 0.5, 0.75})
    for (double eta : {0.1, 0.3, 1.0}) {
      const FractionalParams frac(alpha, eta);
      // default quadrature: midpoint cells, each node standing for +-xi
      const XiGrid g = build_xi_grid(alpha, eta, 0.1, 1.0e4, 1000000);
      long double full = 0.0L, half_right = 0.0L;
      const double expo = 2.0 * alpha - 1.0;
      for (std::size_t l = 0; l < g.size(); ++l) {
        full += static_cast<long double>(g.weight[l]) * g.mu[l] * g.mu[l] / (g.xi[l] * g.xi[l] + eta);
        const double xr = 0.01 * double(l + 1);
        half_right += 0.01L * std::pow(xr, expo) / (xr * xr + eta);
      }
      const double target = std::pow(eta, alpha - 1.0);
      const double rel = std::abs(frac.c_frak() * double(full) - target) / target;
      worst = std::max(worst, rel);
      note(fmt("alpha %.2f eta %.1f: c sum = %.6f, eta^(alpha-1) = %.6f, rel %.2e; half-line right-point sum gives "
               "%.6f",
               alpha, eta, frac.c_frak() * double(full), target, rel, frac.c_frak() * double(half_right)));
    }
  const double secs = seconds_since(t0);
  report(7, worst <= 1e-2 && secs <= 5.0,
         fmt("resolvent quadrature, dxi = 1e-2, xi_max = 1e4, symmetric xi grid: worst rel error %.2e (limit 1e-2), "
             "%.2f s (limit 5 s)",
             worst, secs));
}

// GL weights applied to f' sampled on [0, 1] through the stepping history
double gl_machinery(double alpha, std::size_t n, const std::function<double(double)> &fprime) {
  const double dt = 1.0 / double(n);
  GlHistory h(alpha, 0.0, dt);
  for (std::size_t k = 0; k < n; ++k) h.push(std::vector<double>{fprime(dt * double(k))});
  return gl_history_term(h, n - 1)[0] + h.prefactor() * fprime(1.0);
}

void criterion_8() {
  bool ok = true;
  for (double alpha : {0.25, 0.5, 0.75}) {
    const double exact = 1.0 / gamma_eval(2.0 - alpha);
    std::string errs, orders;
    double prev = NAN;
    bool exact_all = true, order_all = true;
    for (std::size_t n = 64; n <= 1024; n *= 2) {
      const double err = std::abs(gl_machinery(alpha, n, [](double) { return 1.0; }) - exact);
      errs += fmt(" %.1e", err);
      exact_all = exact_all && err <= 1e-12;
      if (!std::isnan(prev)) {
        const double ord = (err > 0.0 && prev > 0.0) ? std::log2(prev / err) : INFINITY;
        orders += fmt(" %.2f", ord);
        order_all = order_all && ord >= 1.9;
      }
      prev = err;
    }
    // second-order check on f = t^3 where the rule is not exact
    const double exact3 = 6.0 / gamma_eval(4.0 - alpha);
    std::string orders3;
    double prev3 = NAN;
    bool order3 = true;
    for (std::size_t n = 64; n <= 1024; n *= 2) {
      const double err = std::abs(gl_machinery(alpha, n, [](double t) { return 3.0 * t * t; }) - exact3);
      if (!std::isnan(prev3)) {
        const double ord = std::log2(prev3 / err);
        orders3 += fmt(" %.2f", ord);
        order3 = order3 && ord >= 1.9;
      }
      prev3 = err;
    }
    if (exact_all)
      note(fmt("alpha %.2f: f = t errors%s (round-off, no order to measure); f = t^3 orders%s", alpha, errs.c_str(),
               orders3.c_str()));
    else
      note(fmt("alpha %.2f: f = t errors%s (orders%s); f = t^3 orders%s", alpha, errs.c_str(), orders.c_str(),
               orders3.c_str()));
    ok = ok && (exact_all || order_all) && order3;
  }
  report(8, ok,
         "GL oracle on f = t, dt = 1/64 .. 1/1024: reproduces t^(1-alpha)/Gamma(2-alpha) to round-off (the rule is "
         "exact on linear data); order >= 1.9 on f = t^3");
}

void criterion_9() {
  bool ok = true;
  double worst_c = 0.0, worst_p = 0.0;
  for (auto [c, p] : std::vector<std::pair<double, double>>{{0.1562, -0.7955}, {0.5, -1.0}, {2.0, -0.4136}}) {
    std::vector<double> t, e;
    for (int i = 0; i <= 1800; ++i) {
      t.push_back(200.0 + i);
      e.push_back(c * std::pow(1.0 + t.back(), p));
    }
    const DecayFit f = fit_power_law(t, e, 200.0);
    worst_c = std::max(worst_c, std::abs(f.c_const - c) / c);
    worst_p = std::max(worst_p, std::abs(f.p_rate - p));
  }
  ok = worst_c <= 1e-6 && worst_p <= 1e-8;
  report(9, ok, fmt("fitter on noiseless C(1+t)^p: worst |dC|/C = %.2e (limit 1e-6), |dp| = %.2e (limit 1e-8)",
                    worst_c, worst_p));
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_csvs(const fs::path &a, const fs::path &b, std::size_t &count) {
  bool same = true;
  for (const auto &e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++count;
    same = same && fs::exists(b / e.path().filename()) && slurp(e.path()) == slurp(b / e.path().filename());
  }
  return same;
}

void criterion_10(const fs::path &out) {
  bool ok = true;
  std::size_t files = 0;
  for (const char *name : {"quick_mbodje.cfg", "quick_gl.cfg", "undamped.cfg"}) {
    const RunConfig rc = std::get<RunConfig>(load_config(fs::path(RAONAKRA_SOURCE_DIR) / "configs" / name));
    run_and_write(rc, out / "det" / name / "a");
    run_and_write(rc, out / "det" / name / "b");
    ok = ok && same_csvs(out / "det" / name / "a", out / "det" / name / "b", files);
  }
  SweepConfig sw = std::get<SweepConfig>(load_config(fs::path(RAONAKRA_SOURCE_DIR) / "configs" / "quick_sweep.cfg"));
  sw.record_runtime = false;
  run_sweep(sw, out / "det" / "sweep" / "a");
  run_sweep(sw, out / "det" / "sweep" / "b");
  ok = ok && same_csvs(out / "det" / "sweep" / "a", out / "det" / "sweep" / "b", files);
  report(10, ok, fmt("determinism: %zu CSV files from repeated runs and sweeps compared byte for byte", files));
}

}  // namespace

int main(int argc, char **argv) {
  bool strict = false;
  fs::path out = fs::current_path() / "acceptance_out";
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0)
      strict = true;
    else if (std::strcmp(argv[i], "--out-dir") == 0 && i + 1 < argc)
      out = argv[++i];
    else {
      std::fprintf(stderr, "usage: acceptance [--strict] [--out-dir DIR]\n");
      return 2;
    }
  }
  fs::create_directories(out);
  const auto t0 = Clock::now();
  try {
    criterion_1();
    const std::size_t m = resolution_study();
    note(fmt("xi modes for the decay runs: M = %zu (dxi = %g)", m, 1.0e4 / double(m)));
    criteria_2_3(m);
    criterion_4(m);
    criteria_5_6(m, out);
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10(out);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "acceptance harness aborted: %s\n", e.what());
    return 1;
  }
  std::size_t passed = 0;
  for (const auto &v : verdicts) passed += v.pass ? 1 : 0;
  std::printf("summary: %zu/%zu criteria pass, %.0f s total\n", passed, verdicts.size(), seconds_since(t0));
  return strict && passed != verdicts.size() ? 1 : 0;
}
