#ifndef RAONAKRA_SIMULATION_HPP
#define RAONAKRA_SIMULATION_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "discretization.hpp"
#include "fractional_gl.hpp"
#include "mbodje.hpp"
#include "model.hpp"
#include "newmark.hpp"

namespace raonakra {

enum class Backend { undamped, grunwald_letnikov, mbodje };

inline const char *to_string(Backend b) {
  switch (b) {
    case Backend::undamped: return "undamped";
    case Backend::grunwald_letnikov: return "grunwald_letnikov";
    case Backend::mbodje: return "mbodje";
  }
  return "?";
}

struct XiSettings {
  double xi_max = 1.0e4;
  std::size_t m_count = 10000;
  XiQuadrature quadrature;
  XiEnergyWeight energy_weight = XiEnergyWeight::one;
};

struct SimulationConfig {
  BeamParams beam;
  FractionalParams frac;
  std::size_t j_count = 100;
  D4Closure d4_closure = D4Closure::zero_ghost;
  TimeGrid tgrid{0.1, 100};
  NewmarkParams newmark;
  Backend backend = Backend::mbodje;
  XiSettings xi;
  double damping_scale = 1.0;  // C = damping_scale * I
  std::size_t record_stride = 1;
  std::vector<double> snapshot_times;
  bool zero_initial_data = false;  // start from rest at the origin instead of the closed-form profiles

  SpatialGrid sgrid() const { return SpatialGrid(j_count, beam.ell); }
};

inline ValidationReport validate(const SimulationConfig &cfg) {
  ValidationReport r = validate_config(cfg.beam, cfg.frac, cfg.sgrid(), cfg.tgrid);
  auto need = [&r](bool ok, const char *field, const char *msg) {
    if (!ok) r.violations.push_back({field, msg});
  };
  need(cfg.newmark.beta_tilde >= 0.0 && cfg.newmark.beta_tilde <= 0.5, "newmark.beta", "beta must lie in [0, 1/2]");
  need(cfg.newmark.gamma_tilde >= 0.0 && cfg.newmark.gamma_tilde <= 1.0, "newmark.gamma", "gamma must lie in [0, 1]");
  need(cfg.record_stride >= 1, "record_stride", "record_stride must be at least 1");
  need(cfg.damping_scale >= 0.0, "damping_scale", "damping_scale must be nonnegative");
  if (cfg.backend == Backend::mbodje) {
    need(cfg.xi.xi_max > 0.0, "xi.xi_max", "xi_max must be positive");
    need(cfg.xi.m_count >= 1, "xi.m_count", "m_count must be at least 1");
  }
  for (double t : cfg.snapshot_times)
    need(t >= 0.0 && t <= cfg.tgrid.t_final(), "snapshot_times", "snapshot time outside [0, T]");
  return r;
}

struct Snapshot {
  double t = 0.0;
  std::size_t step = 0;
  std::vector<double> x;
  BeamState state;
  std::vector<double> xi;                       // empty unless the backend is mbodje
  std::vector<std::array<double, 3>> xi_norms;  // per-mode discrete L2 norm of each block
};

struct SimulationResult {
  TimeSeries series;
  BeamState final_state;
  std::optional<XiField> final_field;
  std::optional<XiGrid> xi_grid;
  std::vector<Snapshot> snapshots;
  double initial_energy = 0.0;
  double max_identity_residual = 0.0;  // max over steps of |dE - predicted dE|
  double max_energy_increase = 0.0;    // max over steps of max(dE, 0)
  std::size_t factorizations = 0;
};

class SimulationError : public std::runtime_error {
public:
  SimulationError(const std::string &what, std::size_t step) : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

private:
  std::size_t step_;
};

namespace detail {

inline bool all_finite(const BeamState &s) {
  for (std::size_t i = 0; i < s.dofs(); ++i)
    if (!std::isfinite(s.u_disp[i]) || !std::isfinite(s.u_vel[i]) || !std::isfinite(s.u_acc[i])) return false;
  return true;
}

inline Snapshot take_snapshot(const BeamState &state, std::size_t step, const SpatialGrid &sgrid,
                              const XiField *field, const XiGrid *grid) {
  Snapshot snap;
  snap.t = state.t;
  snap.step = step;
  snap.state = state;
  for (std::size_t j = 0; j < sgrid.j_count(); ++j) snap.x.push_back(sgrid.node(j + 1));
  if (field && grid) {
    const std::size_t n = sgrid.j_count();
    snap.xi = grid->xi;
    for (std::size_t l = 0; l < field->modes(); ++l) {
      const auto m = field->mode(l);
      std::array<double, 3> norms{};
      for (std::size_t b = 0; b < 3; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += m[b * n + j] * m[b * n + j];
        norms[b] = std::sqrt(sgrid.dx() * s);
      }
      snap.xi_norms.push_back(norms);
    }
  }
  return snap;
}

}  // namespace detail

/// Runs the configured backend for N steps, recording the discrete energy
/// every `record_stride` steps and checking the per-step energy balance.
inline SimulationResult run_simulation(const SimulationConfig &cfg) {
  const ValidationReport report = validate(cfg);
  if (!report.ok()) throw ConfigError("invalid simulation config:\n" + report.to_string());

  const SpatialGrid sgrid = cfg.sgrid();
  const TimeGrid &tgrid = cfg.tgrid;
  const double dt = tgrid.dt();
  const NewmarkParams &nm = cfg.newmark;
  const DiscreteOperators ops = build_operators(sgrid, cfg.beam, cfg.d4_closure);
  const std::size_t dofs = ops.dofs();

  BeamState state = cfg.zero_initial_data ? BeamState(dofs) : build_initial_state(sgrid, cfg.beam);
  // No damping at t = 0: Phi(0) = 0 and the history integral is empty.
  {
    const std::vector<extended> u(state.u_disp.begin(), state.u_disp.end());
    const std::vector<extended> ku = ops.k_stiff.matvec_extended(u);
    for (std::size_t i = 0; i < dofs; ++i) state.set_acc(i, -ku[i]);
  }

  SimulationResult res;
  std::optional<XiGrid> grid;
  std::optional<XiField> field;
  std::optional<GlHistory> hist;
  std::vector<double> gl_force_prev(dofs, 0.0);
  EffectiveSystem eff;

  switch (cfg.backend) {
    case Backend::undamped:
      eff = EffectiveSystem(ops.k_stiff, 1.0, nm.beta_tilde * dt * dt);
      break;
    case Backend::grunwald_letnikov:
      hist.emplace(cfg.frac.alpha(), cfg.frac.eta(), dt);
      hist->push(state.u_vel);
      eff = gl_effective_matrix(ops, cfg.frac, tgrid, nm, cfg.damping_scale);
      break;
    case Backend::mbodje:
      grid = build_xi_grid(cfg.frac.alpha(), cfg.frac.eta(), dt, cfg.xi.xi_max, cfg.xi.m_count, cfg.xi.quadrature);
      for (double &w : grid->weight) w *= cfg.damping_scale;
      field.emplace(grid->size(), dofs);
      eff = mbodje_effective_matrix(ops, *grid, cfg.frac, nm);
      break;
  }
  res.factorizations = 1;

  auto energy_now = [&](double xi_energy) {
    return make_energy(kinetic_energy(state), elastic_energy(state, ops), xi_energy);
  };
  EnergyBreakdown e_prev = energy_now(0.0);
  if (field) e_prev = mbodje_energy(state, *field, *grid, ops, cfg.frac, cfg.xi.energy_weight);
  res.initial_energy = e_prev.total;
  res.series.push_back({0.0, e_prev, 0.0});

  std::vector<std::size_t> snapshot_steps;
  for (double t : cfg.snapshot_times) snapshot_steps.push_back(static_cast<std::size_t>(std::llround(t / dt)));
  auto maybe_snapshot = [&](std::size_t step) {
    for (std::size_t s : snapshot_steps)
      if (s == step)
        res.snapshots.push_back(detail::take_snapshot(state, step, sgrid, field ? &*field : nullptr,
                                                      grid ? &*grid : nullptr));
  };
  maybe_snapshot(0);

  std::vector<extended> pred(dofs);
  std::vector<double> vel_prev;
  double window_residual = 0.0;
  for (std::size_t n = 0; n < tgrid.n_steps(); ++n) {
    double predicted = 0.0;
    double xi_energy = 0.0;
    switch (cfg.backend) {
      case Backend::undamped: {
        newmark_displacement_predictor(state, dt, nm, pred);
        std::vector<extended> rhs = ops.k_stiff.matvec_extended(pred);
        for (extended &r : rhs) r = -r;
        newmark_update(state, std::span<const extended>(eff.solve_extended(rhs)), dt, nm);
        break;
      }
      case Backend::grunwald_letnikov: {
        vel_prev = state.u_vel;
        GlStepInfo info = gl_step(state, *hist, eff, ops, tgrid, nm, cfg.damping_scale);
        predicted = gl_dissipation(vel_prev, state.u_vel, gl_force_prev, info.damping_force, dt);
        gl_force_prev = std::move(info.damping_force);
        break;
      }
      case Backend::mbodje: {
        const MbodjeStepInfo info = mbodje_step(state, *field, eff, ops, *grid, cfg.frac, nm, cfg.xi.energy_weight);
        predicted = info.dissipation;
        xi_energy = info.xi_energy;
        break;
      }
    }
    state.t = tgrid.time(n + 1);
    if (!detail::all_finite(state))
      throw SimulationError("non-finite state at step " + std::to_string(n + 1), n + 1);

    const EnergyBreakdown e = energy_now(xi_energy);
    const double de = e.total - e_prev.total;
    const double resid = de - predicted;
    if (std::abs(resid) > std::abs(window_residual)) window_residual = resid;
    res.max_identity_residual = std::max(res.max_identity_residual, std::abs(resid));
    res.max_energy_increase = std::max(res.max_energy_increase, de);
    e_prev = e;

    if ((n + 1) % cfg.record_stride == 0) {
      res.series.push_back({state.t, e, window_residual});
      window_residual = 0.0;
    }
    maybe_snapshot(n + 1);
  }

  res.final_state = std::move(state);
  res.final_field = std::move(field);
  res.xi_grid = std::move(grid);
  return res;
}

}  // namespace raonakra

#endif  // RAONAKRA_SIMULATION_HPP
