#ifndef RAONAKRA_IO_HPP
#define RAONAKRA_IO_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "diagnostics.hpp"
#include "simulation.hpp"

namespace raonakra {

struct RunConfig {
  SimulationConfig sim;
  std::string out_dir = "out";
  double fit_t_min = -1.0;  // negative: T / 10

  double resolved_fit_t_min() const { return fit_t_min >= 0.0 ? fit_t_min : sim.tgrid.t_final() / 10.0; }
};

struct SweepConfig {
  RunConfig base;
  std::vector<double> alphas;
  std::vector<double> etas;
  std::size_t parallel_width = 1;
  bool record_runtime = true;  // false writes runtime_s = 0 so the summary is reproducible byte for byte
};

using ParsedConfig = std::variant<RunConfig, SweepConfig>;

struct ConfigIssue {
  int line = 0;  // 1-based, 0 when no position applies
  std::string message;

  std::string to_string() const { return line > 0 ? "line " + std::to_string(line) + ": " + message : message; }
};

class ConfigParseError : public std::runtime_error {
public:
  explicit ConfigParseError(std::vector<ConfigIssue> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<ConfigIssue> &issues() const { return issues_; }

private:
  static std::string join(const std::vector<ConfigIssue> &issues) {
    std::string s;
    for (const auto &i : issues) s += i.to_string() + "\n";
    return s;
  }
  std::vector<ConfigIssue> issues_;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// enum names

inline const char *to_string(D4Closure c) { return c == D4Closure::zero_ghost ? "zero_ghost" : "reflection"; }
inline const char *to_string(XiNodes n) { return n == XiNodes::right_point ? "right_point" : "midpoint_cell"; }
inline const char *to_string(XiWeighting w) {
  return w == XiWeighting::full_line ? "full_line" : w == XiWeighting::dxi ? "dxi" : "none";
}
inline const char *to_string(XiEnergyWeight w) { return w == XiEnergyWeight::one ? "one" : "mu"; }

namespace detail {

struct Parser {
  std::vector<ConfigIssue> issues;

  static int line_of(const YAML::Node &n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

  void error(const YAML::Node &n, const std::string &msg) { issues.push_back({line_of(n), msg}); }
  void error(const std::string &msg) { issues.push_back({0, msg}); }

  void check_keys(const YAML::Node &map, const std::string &section, const std::set<std::string> &allowed) {
    for (const auto &kv : map) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key))
        issues.push_back({line_of(kv.first), "unknown key '" + (section.empty() ? key : section + "." + key) + "'"});
    }
  }

  template <class T>
  std::optional<T> get(const YAML::Node &map, const char *key, const std::string &section, const char *type_name) {
    if (!map || !map.IsMap()) return std::nullopt;
    const YAML::Node n = map[key];
    if (!n) return std::nullopt;
    try {
      if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
      return n.as<T>();
    } catch (const YAML::BadConversion &) {
      error(n, "type mismatch: " + section + "." + key + " must be " + type_name);
      return std::nullopt;
    }
  }

  std::optional<double> number(const YAML::Node &map, const char *key, const std::string &section) {
    return get<double>(map, key, section, "a number");
  }

  std::optional<std::size_t> count(const YAML::Node &map, const char *key, const std::string &section) {
    auto v = get<long long>(map, key, section, "an integer");
    if (v && *v < 0) {
      error(map[key], section + "." + key + " must be nonnegative");
      return std::nullopt;
    }
    return v ? std::optional<std::size_t>(static_cast<std::size_t>(*v)) : std::nullopt;
  }

  std::optional<std::vector<double>> number_list(const YAML::Node &map, const char *key, const std::string &section) {
    if (!map || !map.IsMap()) return std::nullopt;
    const YAML::Node n = map[key];
    if (!n) return std::nullopt;
    if (!n.IsSequence()) {
      error(n, "type mismatch: " + section + "." + key + " must be a list of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto &e : n) {
      try {
        out.push_back(e.as<double>());
      } catch (const YAML::BadConversion &) {
        error(e, "type mismatch: " + section + "." + key + " must be a list of numbers");
        return std::nullopt;
      }
    }
    return out;
  }

  template <class E>
  std::optional<E> choice(const YAML::Node &map, const char *key, const std::string &section,
                          const std::map<std::string, E> &names) {
    auto s = get<std::string>(map, key, section, "a string");
    if (!s) return std::nullopt;
    auto it = names.find(*s);
    if (it == names.end()) {
      std::string opts;
      for (const auto &kv : names) opts += (opts.empty() ? "" : ", ") + kv.first;
      error(map[key], section + "." + key + ": unknown value '" + *s + "' (expected one of " + opts + ")");
      return std::nullopt;
    }
    return it->second;
  }

  YAML::Node section(const YAML::Node &root, const char *name) {
    const YAML::Node n = root[name];
    if (n && !n.IsMap()) {
      error(n, "section '" + std::string(name) + "' must be a mapping");
      return YAML::Node();
    }
    return n;
  }
};

}  // namespace detail

/// Parses the YAML config grammar documented in README.md. Throws
/// ConfigParseError carrying every problem found.
inline ParsedConfig parse_config(const std::string &text) {
  detail::Parser p;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException &e) {
    throw ConfigParseError({{e.mark.line + 1, "syntax error: " + e.msg}});
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigParseError({{detail::Parser::line_of(root), "top level must be a mapping"}});

  p.check_keys(root, "", {"beam", "fractional", "grid", "time", "newmark", "scheme", "xi", "output", "sweep"});

  RunConfig rc;
  SimulationConfig &sc = rc.sim;

  const YAML::Node beam = p.section(root, "beam");
  if (beam) {
    p.check_keys(beam, "beam", {"theta", "chi", "zeta", "k", "gamma", "ell"});
    if (auto v = p.number(beam, "theta", "beam")) sc.beam.theta = *v;
    if (auto v = p.number(beam, "chi", "beam")) sc.beam.chi = *v;
    if (auto v = p.number(beam, "zeta", "beam")) sc.beam.zeta = *v;
    if (auto v = p.number(beam, "k", "beam")) sc.beam.k = *v;
    if (auto v = p.number(beam, "gamma", "beam")) sc.beam.gamma = *v;
    if (auto v = p.number(beam, "ell", "beam")) sc.beam.ell = *v;
  }

  const YAML::Node frac = p.section(root, "fractional");
  std::optional<double> alpha, eta;
  if (frac) {
    p.check_keys(frac, "fractional", {"alpha", "eta"});
    alpha = p.number(frac, "alpha", "fractional");
    eta = p.number(frac, "eta", "fractional");
  }

  const YAML::Node sweep = p.section(root, "sweep");
  std::optional<std::vector<double>> alphas, etas;
  SweepConfig sw;
  if (sweep) {
    p.check_keys(sweep, "sweep", {"alphas", "etas", "parallel_width", "record_runtime"});
    alphas = p.number_list(sweep, "alphas", "sweep");
    etas = p.number_list(sweep, "etas", "sweep");
    if (auto v = p.count(sweep, "parallel_width", "sweep")) sw.parallel_width = *v;
    if (auto v = p.get<bool>(sweep, "record_runtime", "sweep", "true or false")) sw.record_runtime = *v;
  }
  const bool run_keys = frac && (frac["alpha"] || frac["eta"]);
  const bool sweep_mode = static_cast<bool>(sweep);
  if (run_keys && sweep_mode) p.error(frac, "run and sweep keys conflict");

  const YAML::Node grid = p.section(root, "grid");
  if (grid) {
    p.check_keys(grid, "grid", {"J", "d4_closure"});
    if (auto v = p.count(grid, "J", "grid")) sc.j_count = *v;
    if (auto v = p.choice<D4Closure>(grid, "d4_closure", "grid",
                                     {{"zero_ghost", D4Closure::zero_ghost}, {"reflection", D4Closure::reflection}}))
      sc.d4_closure = *v;
  }
  if (!grid || !grid["J"]) p.error("missing required key 'grid.J'");

  const YAML::Node time = p.section(root, "time");
  std::optional<double> t_final, dt;
  std::optional<std::size_t> steps;
  if (time) {
    p.check_keys(time, "time", {"T", "steps", "dt"});
    t_final = p.number(time, "T", "time");
    steps = p.count(time, "steps", "time");
    dt = p.number(time, "dt", "time");
  }
  if (!time || !time["T"]) p.error("missing required key 'time.T'");
  if (!time || (!time["steps"] && !time["dt"])) p.error("missing required key 'time.steps' (or 'time.dt')");
  if (time && time["steps"] && time["dt"]) p.error(time["dt"], "time.steps and time.dt are mutually exclusive");
  if (t_final && steps && *steps > 0) {
    sc.tgrid = TimeGrid(*t_final / static_cast<double>(*steps), *steps);
  } else if (t_final && dt && *dt > 0.0) {
    const double n = *t_final / *dt;
    const double nr = std::round(n);
    if (std::abs(n - nr) > 1e-9 * std::max(1.0, n)) p.error(time["dt"], "time.T must be a whole multiple of time.dt");
    sc.tgrid = TimeGrid(*dt, static_cast<std::size_t>(nr));
  } else if (t_final && (steps || dt)) {
    p.error(time, "time.steps / time.dt must be positive");
  }

  const YAML::Node nm = p.section(root, "newmark");
  if (nm) {
    p.check_keys(nm, "newmark", {"beta", "gamma"});
    if (auto v = p.number(nm, "beta", "newmark")) sc.newmark.beta_tilde = *v;
    if (auto v = p.number(nm, "gamma", "newmark")) sc.newmark.gamma_tilde = *v;
  }

  const YAML::Node scheme = p.section(root, "scheme");
  if (scheme) {
    p.check_keys(scheme, "scheme", {"backend", "damping_scale"});
    if (auto v = p.choice<Backend>(scheme, "backend", "scheme",
                                   {{"undamped", Backend::undamped},
                                    {"grunwald_letnikov", Backend::grunwald_letnikov},
                                    {"mbodje", Backend::mbodje}}))
      sc.backend = *v;
    if (auto v = p.number(scheme, "damping_scale", "scheme")) sc.damping_scale = *v;
  }
  if (!scheme || !scheme["backend"]) p.error("missing required key 'scheme.backend'");

  const YAML::Node xi = p.section(root, "xi");
  if (xi) {
    p.check_keys(xi, "xi", {"xi_max", "m_count", "nodes", "weighting", "energy_weight"});
    if (auto v = p.number(xi, "xi_max", "xi")) sc.xi.xi_max = *v;
    if (auto v = p.count(xi, "m_count", "xi")) sc.xi.m_count = *v;
    if (auto v = p.choice<XiNodes>(xi, "nodes", "xi",
                                   {{"right_point", XiNodes::right_point}, {"midpoint_cell", XiNodes::midpoint_cell}}))
      sc.xi.quadrature.nodes = *v;
    if (auto v = p.choice<XiWeighting>(
            xi, "weighting", "xi",
            {{"full_line", XiWeighting::full_line}, {"dxi", XiWeighting::dxi}, {"none", XiWeighting::none}}))
      sc.xi.quadrature.weighting = *v;
    if (auto v = p.choice<XiEnergyWeight>(xi, "energy_weight", "xi",
                                          {{"one", XiEnergyWeight::one}, {"mu", XiEnergyWeight::mu}}))
      sc.xi.energy_weight = *v;
  }

  const YAML::Node out = p.section(root, "output");
  if (out) {
    p.check_keys(out, "output", {"directory", "record_stride", "snapshot_times", "fit_t_min"});
    if (auto v = p.get<std::string>(out, "directory", "output", "a string")) rc.out_dir = *v;
    if (auto v = p.count(out, "record_stride", "output")) sc.record_stride = *v;
    if (auto v = p.number_list(out, "snapshot_times", "output")) sc.snapshot_times = *v;
    if (auto v = p.number(out, "fit_t_min", "output")) rc.fit_t_min = *v;
  }

  if (sweep_mode) {
    if (!alphas && !sweep["alphas"]) p.error("missing required key 'sweep.alphas'");
    if (!etas && !sweep["etas"]) p.error("missing required key 'sweep.etas'");
    if (alphas && alphas->empty()) p.error(sweep["alphas"], "sweep.alphas must be nonempty");
    if (etas && etas->empty()) p.error(sweep["etas"], "sweep.etas must be nonempty");
    if (sw.parallel_width == 0) p.error(sweep["parallel_width"], "sweep.parallel_width must be at least 1");
  } else if (!run_keys || !frac["alpha"] || !frac["eta"]) {
    if (!frac || !frac["alpha"]) p.error("missing required key 'fractional.alpha' (or 'sweep.alphas')");
    if (!frac || !frac["eta"]) p.error("missing required key 'fractional.eta' (or 'sweep.etas')");
  }

  if (!p.issues.empty()) throw ConfigParseError(p.issues);

  // semantic validation once the structure is sound
  auto validate_with = [&](double a, double e) {
    SimulationConfig probe = sc;
    probe.frac = FractionalParams(a, e);
    const ValidationReport r = validate(probe);
    for (const auto &v : r.violations) p.error(v.field + ": " + v.message + " (alpha=" + std::to_string(a) +
                                               ", eta=" + std::to_string(e) + ")");
  };
  if (sweep_mode) {
    for (double a : *alphas)
      for (double e : *etas) validate_with(a, e);
    if (!p.issues.empty()) throw ConfigParseError(p.issues);
    sw.alphas = *alphas;
    sw.etas = *etas;
    sw.base = rc;
    return sw;
  }
  sc.frac = FractionalParams(*alpha, *eta);
  {
    const ValidationReport r = validate(sc);
    for (const auto &v : r.violations) p.error(v.field + ": " + v.message);
  }
  if (!p.issues.empty()) throw ConfigParseError(p.issues);
  return rc;
}

inline ParsedConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Resolved config with every default filled in, in the same grammar.
inline std::string dump_config(const ParsedConfig &cfg) {
  const RunConfig &rc = std::holds_alternative<RunConfig>(cfg) ? std::get<RunConfig>(cfg)
                                                               : std::get<SweepConfig>(cfg).base;
  const SimulationConfig &sc = rc.sim;
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "beam" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "theta" << YAML::Value << sc.beam.theta << YAML::Key << "chi" << YAML::Value << sc.beam.chi;
  e << YAML::Key << "zeta" << YAML::Value << sc.beam.zeta << YAML::Key << "k" << YAML::Value << sc.beam.k;
  e << YAML::Key << "gamma" << YAML::Value << sc.beam.gamma << YAML::Key << "ell" << YAML::Value << sc.beam.ell;
  e << YAML::EndMap;
  if (std::holds_alternative<RunConfig>(cfg)) {
    e << YAML::Key << "fractional" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "alpha" << YAML::Value << sc.frac.alpha() << YAML::Key << "eta" << YAML::Value << sc.frac.eta();
    e << YAML::EndMap;
  }
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "J" << YAML::Value << sc.j_count << YAML::Key << "d4_closure" << YAML::Value
    << to_string(sc.d4_closure);
  e << YAML::EndMap;
  e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "T" << YAML::Value << sc.tgrid.t_final() << YAML::Key << "steps" << YAML::Value
    << sc.tgrid.n_steps();
  e << YAML::EndMap;
  e << YAML::Key << "newmark" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "beta" << YAML::Value << sc.newmark.beta_tilde << YAML::Key << "gamma" << YAML::Value
    << sc.newmark.gamma_tilde;
  e << YAML::EndMap;
  e << YAML::Key << "scheme" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "backend" << YAML::Value << to_string(sc.backend) << YAML::Key << "damping_scale"
    << YAML::Value << sc.damping_scale;
  e << YAML::EndMap;
  e << YAML::Key << "xi" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "xi_max" << YAML::Value << sc.xi.xi_max << YAML::Key << "m_count" << YAML::Value
    << sc.xi.m_count;
  e << YAML::Key << "nodes" << YAML::Value << to_string(sc.xi.quadrature.nodes);
  e << YAML::Key << "weighting" << YAML::Value << to_string(sc.xi.quadrature.weighting);
  e << YAML::Key << "energy_weight" << YAML::Value << to_string(sc.xi.energy_weight);
  e << YAML::EndMap;
  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "directory" << YAML::Value << rc.out_dir;
  e << YAML::Key << "record_stride" << YAML::Value << sc.record_stride;
  e << YAML::Key << "snapshot_times" << YAML::Value << YAML::Flow << sc.snapshot_times;
  e << YAML::Key << "fit_t_min" << YAML::Value << rc.resolved_fit_t_min();
  e << YAML::EndMap;
  if (std::holds_alternative<SweepConfig>(cfg)) {
    const SweepConfig &sw = std::get<SweepConfig>(cfg);
    e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "alphas" << YAML::Value << YAML::Flow << sw.alphas;
    e << YAML::Key << "etas" << YAML::Value << YAML::Flow << sw.etas;
    e << YAML::Key << "parallel_width" << YAML::Value << sw.parallel_width;
    e << YAML::Key << "record_runtime" << YAML::Value << sw.record_runtime;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes `content` to a sibling temp file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

inline const char *energy_csv_header() { return "t,E_total,E_kinetic,E_elastic,E_xi,dE_identity_residual"; }

inline std::string energy_csv_text(const TimeSeries &series) {
  std::string s = energy_csv_header();
  s += '\n';
  for (const auto &r : series) {
    s += format_double(r.t) + ',' + format_double(r.energy.total) + ',' + format_double(r.energy.kinetic) + ',' +
         format_double(r.energy.elastic) + ',' + format_double(r.energy.xi_energy) + ',' +
         format_double(r.identity_residual) + '\n';
  }
  return s;
}

inline void write_energy_csv(const TimeSeries &series, const std::filesystem::path &path) {
  write_file_atomic(path, energy_csv_text(series));
}

inline std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline TimeSeries read_energy_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != energy_csv_header()) throw IoError(path.string() + ": unexpected header '" + line + "'");
  TimeSeries series;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) throw IoError(path.string() + ": row " + std::to_string(row) + " has wrong column count");
    double v[6];
    for (int i = 0; i < 6; ++i) {
      char *end = nullptr;
      v[i] = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0')
        throw IoError(path.string() + ": row " + std::to_string(row) + " is not numeric");
    }
    TimeSeriesRecord r;
    r.t = v[0];
    r.energy.total = v[1];
    r.energy.kinetic = v[2];
    r.energy.elastic = v[3];
    r.energy.xi_energy = v[4];
    r.identity_residual = v[5];
    series.push_back(r);
  }
  return series;
}

inline std::string snapshot_csv_text(const Snapshot &snap) {
  const std::size_t n = snap.x.size();
  std::string s = "x,u,v,w\n";
  for (std::size_t j = 0; j < n; ++j)
    s += format_double(snap.x[j]) + ',' + format_double(snap.state.u_disp[j]) + ',' +
         format_double(snap.state.u_disp[n + j]) + ',' + format_double(snap.state.u_disp[2 * n + j]) + '\n';
  return s;
}

inline std::string xi_snapshot_csv_text(const Snapshot &snap) {
  std::string s = "xi,phi_norm,varphi_norm,psi_norm\n";
  for (std::size_t l = 0; l < snap.xi.size(); ++l)
    s += format_double(snap.xi[l]) + ',' + format_double(snap.xi_norms[l][0]) + ',' +
         format_double(snap.xi_norms[l][1]) + ',' + format_double(snap.xi_norms[l][2]) + '\n';
  return s;
}

/// Writes `x,u,v,w` to `path`; with auxiliary data present also writes the
/// per-mode norms to `xi_path`.
inline void write_snapshot_csv(const Snapshot &snap, const std::filesystem::path &path,
                               const std::filesystem::path &xi_path = {}) {
  write_file_atomic(path, snapshot_csv_text(snap));
  if (!xi_path.empty() && !snap.xi.empty()) write_file_atomic(xi_path, xi_snapshot_csv_text(snap));
}

inline std::string snapshot_tag(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

// ---------------------------------------------------------------------------
// plot scripts (matplotlib)

struct PlotSeries {
  std::string csv;  // path as referenced from the script
  std::string label;
  double alpha = 0.0;
  std::optional<DecayFit> fit;
};

inline std::string python_string(const std::string &s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\\' || c == '\'') out += '\\';
    out += c;
  }
  return out + "'";
}

/// Log-log energy curves, one color per alpha, with C (1 + t)^p overlaid
/// where a fit is available. Data paths are resolved relative to the script.
inline std::string plot_script_text(const std::vector<PlotSeries> &series, const std::string &title) {
  std::string s;
  s += "#!/usr/bin/env python3\n";
  s += "import csv\nimport os\nimport sys\n\n";
  s += "import matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n";
  s += "HERE = os.path.dirname(os.path.abspath(__file__))\n";
  s += "SERIES = [\n";
  for (const auto &ps : series) {
    s += "    (" + python_string(ps.csv) + ", " + python_string(ps.label) + ", " + format_double(ps.alpha) + ", ";
    if (ps.fit)
      s += "(" + format_double(ps.fit->c_const) + ", " + format_double(ps.fit->p_rate) + ", " +
           format_double(ps.fit->t_min) + ", " + format_double(ps.fit->t_max) + ")";
    else
      s += "None";
    s += "),\n";
  }
  s += "]\n\n";
  s += "def load(path):\n";
  s += "    t, e = [], []\n";
  s += "    with open(os.path.join(HERE, path)) as fh:\n";
  s += "        for row in csv.DictReader(fh):\n";
  s += "            t.append(float(row['t']))\n";
  s += "            e.append(float(row['E_total']))\n";
  s += "    return t, e\n\n";
  s += "def main():\n";
  s += "    alphas = sorted({a for _, _, a, _ in SERIES})\n";
  s += "    cmap = plt.get_cmap('viridis')\n";
  s += "    colors = {a: cmap(i / max(1, len(alphas) - 1)) for i, a in enumerate(alphas)}\n";
  s += "    fig, ax = plt.subplots(figsize=(7, 5))\n";
  s += "    seen = set()\n";
  s += "    for path, label, a, fit in SERIES:\n";
  s += "        t, e = load(path)\n";
  s += "        pts = [(1.0 + ti, ei) for ti, ei in zip(t, e) if ei > 0]\n";
  s += "        name = 'alpha = %g' % a if a not in seen else None\n";
  s += "        seen.add(a)\n";
  s += "        ax.loglog([p[0] for p in pts], [p[1] for p in pts], color=colors[a], lw=1, label=name)\n";
  s += "        if fit is not None:\n";
  s += "            c, p, t0, t1 = fit\n";
  s += "            xs = [1.0 + t0 + (t1 - t0) * k / 50.0 for k in range(51)]\n";
  s += "            ax.loglog(xs, [c * x ** p for x in xs], color=colors[a], ls='--', lw=0.8)\n";
  s += "    ax.set_xlabel('1 + t')\n";
  s += "    ax.set_ylabel('E')\n";
  s += "    ax.set_title(" + python_string(title) + ")\n";
  s += "    ax.legend()\n";
  s += "    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, 'energy.png')\n";
  s += "    fig.savefig(out, dpi=150, bbox_inches='tight')\n\n";
  s += "if __name__ == '__main__':\n";
  s += "    main()\n";
  return s;
}

inline void emit_plot_script(const std::vector<PlotSeries> &series, const std::filesystem::path &path,
                             const std::string &title = "energy") {
  write_file_atomic(path, plot_script_text(series, title));
}

// ---------------------------------------------------------------------------
// orchestration

struct RunOutputs {
  SimulationResult result;
  std::optional<DecayFit> fit;
  std::string fit_error;
  std::vector<std::filesystem::path> files;
};

/// Runs one config and writes energy.csv, snapshots and plot_energy.py to the
/// output directory.
inline RunOutputs run_and_write(const RunConfig &rc, const std::filesystem::path &out_dir) {
  RunOutputs o;
  o.result = run_simulation(rc.sim);
  try {
    o.fit = fit_power_law(o.result.series, rc.resolved_fit_t_min());
  } catch (const FitError &e) {
    o.fit_error = e.what();
  }
  const auto energy = out_dir / "energy.csv";
  write_energy_csv(o.result.series, energy);
  o.files.push_back(energy);
  for (const auto &snap : o.result.snapshots) {
    const std::string tag = snapshot_tag(snap.t);
    const auto sp = out_dir / ("snapshot_t" + tag + ".csv");
    const auto xp = out_dir / ("xi_snapshot_t" + tag + ".csv");
    write_snapshot_csv(snap, sp, xp);
    o.files.push_back(sp);
    if (!snap.xi.empty()) o.files.push_back(xp);
  }
  PlotSeries ps{"energy.csv", "energy", rc.sim.frac.alpha(), o.fit};
  const auto plot = out_dir / "plot_energy.py";
  emit_plot_script({ps}, plot, "alpha = " + snapshot_tag(rc.sim.frac.alpha()) + ", eta = " +
                                   snapshot_tag(rc.sim.frac.eta()));
  o.files.push_back(plot);
  return o;
}

struct SweepRow {
  double alpha = 0.0;
  double eta = 0.0;
  double c_const = std::nan("");
  double p_rate = std::nan("");
  double residual = std::nan("");
  double runtime_s = 0.0;
  std::string status = "ok";
  std::string energy_csv;
};

struct SweepSummary {
  std::vector<SweepRow> rows;  // sorted by (alpha, eta)

  bool all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const SweepRow &r) { return r.status == "ok"; });
  }
};

inline const char *sweep_csv_header() { return "alpha,eta,C,p,residual,runtime_s,status"; }

inline std::string sweep_csv_text(const SweepSummary &s) {
  std::string out = sweep_csv_header();
  out += '\n';
  for (const auto &r : s.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out += format_double(r.alpha) + ',' + format_double(r.eta) + ',' + format_double(r.c_const) + ',' +
           format_double(r.p_rate) + ',' + format_double(r.residual) + ',' + format_double(r.runtime_s) + ',' +
           status + '\n';
  }
  return out;
}

inline std::string sweep_run_name(double alpha, double eta) {
  return "energy_alpha" + snapshot_tag(alpha) + "_eta" + snapshot_tag(eta) + ".csv";
}

/// Runs every (alpha, eta) pair on up to parallel_width threads and writes one
/// energy CSV per run, sweep_summary.csv and plot_sweep.py. A failed run is
/// reported in its status column and does not stop the sweep.
inline SweepSummary run_sweep(const SweepConfig &cfg, const std::filesystem::path &out_dir) {
  std::vector<std::pair<double, double>> jobs;
  for (double a : cfg.alphas)
    for (double e : cfg.etas) jobs.emplace_back(a, e);
  std::sort(jobs.begin(), jobs.end());
  jobs.erase(std::unique(jobs.begin(), jobs.end()), jobs.end());

  SweepSummary summary;
  summary.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      SweepRow &row = summary.rows[i];
      row.alpha = jobs[i].first;
      row.eta = jobs[i].second;
      row.energy_csv = sweep_run_name(row.alpha, row.eta);
      RunConfig rc = cfg.base;
      rc.sim.frac = FractionalParams(row.alpha, row.eta);
      rc.sim.snapshot_times.clear();
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const SimulationResult res = run_simulation(rc.sim);
        write_energy_csv(res.series, out_dir / row.energy_csv);
        const DecayFit fit = fit_power_law(res.series, rc.resolved_fit_t_min());
        row.c_const = fit.c_const;
        row.p_rate = fit.p_rate;
        row.residual = fit.residual;
      } catch (const std::exception &e) {
        row.status = std::string("failed: ") + e.what();
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.runtime_s = cfg.record_runtime ? secs : 0.0;
    }
  };
  const std::size_t width = std::max<std::size_t>(1, std::min(cfg.parallel_width, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < width; ++k) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();

  write_file_atomic(out_dir / "sweep_summary.csv", sweep_csv_text(summary));
  std::vector<PlotSeries> plots;
  for (const auto &r : summary.rows) {
    if (r.status != "ok") continue;
    DecayFit f;
    f.c_const = r.c_const;
    f.p_rate = r.p_rate;
    f.t_min = cfg.base.resolved_fit_t_min();
    f.t_max = cfg.base.sim.tgrid.t_final();
    plots.push_back({r.energy_csv, "eta = " + snapshot_tag(r.eta), r.alpha, f});
  }
  emit_plot_script(plots, out_dir / "plot_sweep.py", "energy decay by alpha");
  return summary;
}

}  // namespace raonakra

#endif  // RAONAKRA_IO_HPP
