#ifndef RAONAKRA_DIAGNOSTICS_HPP
#define RAONAKRA_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "discretization.hpp"
#include "mbodje.hpp"
#include "model.hpp"

namespace raonakra {

struct EnergyBreakdown {
  double kinetic = 0.0;
  double elastic = 0.0;
  double xi_energy = 0.0;
  double total = 0.0;
};

inline EnergyBreakdown make_energy(double kinetic, double elastic, double xi_energy) {
  return {kinetic, elastic, xi_energy, kinetic + elastic + xi_energy};
}

/// Elastic energy split by mechanism; the parts sum to 1/2 U^T K U.
struct ElasticParts {
  double theta_part = 0.0;  // theta/2 |R u|^2
  double chi_part = 0.0;    // chi/2 |R v|^2
  double zeta_part = 0.0;   // zeta/2 w^T D4 w
  double shear_part = 0.0;  // k/2 |-u + v + gamma R w|^2

  double sum() const { return theta_part + chi_part + zeta_part + shear_part; }
};

inline ElasticParts elastic_parts(std::span<const double> u_disp, const DiscreteOperators &ops) {
  const std::size_t n = ops.j_count();
  ElasticParts e;
  std::vector<double> tmp(n);
  auto sq = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  ops.r_factor.apply(u_disp.subspan(0, n), tmp);
  e.theta_part = 0.5 * ops.params.theta * sq(tmp);
  ops.r_factor.apply(u_disp.subspan(n, n), tmp);
  e.chi_part = 0.5 * ops.params.chi * sq(tmp);
  const auto w = u_disp.subspan(2 * n, n);
  ops.d4.matvec(w, tmp);
  double wd = 0.0;
  for (std::size_t j = 0; j < n; ++j) wd += w[j] * tmp[j];
  e.zeta_part = 0.5 * ops.params.zeta * wd;
  e.shear_part = 0.5 * ops.params.k * sq(shear_vector(u_disp, ops));
  return e;
}

inline double kinetic_energy(const BeamState &state) {
  double s = 0.0;
  for (double v : state.u_vel) s += v * v;
  return 0.5 * s;
}

inline double elastic_energy(const BeamState &state, const DiscreteOperators &ops) {
  return 0.5 * ops.k_stiff.quadratic_form(state.u_disp);
}

/// Beam energy without an auxiliary contribution.
inline EnergyBreakdown gl_energy(const BeamState &state, const DiscreteOperators &ops) {
  return make_energy(kinetic_energy(state), elastic_energy(state, ops), 0.0);
}

inline double xi_field_energy(const XiField &field, const XiGrid &grid, const FractionalParams &frac,
                              XiEnergyWeight ew = XiEnergyWeight::one) {
  if (field.modes() != grid.size()) throw std::invalid_argument("xi_field_energy: mode count mismatch");
  std::vector<double> acc(field.dofs(), 0.0);
  for (std::size_t l = 0; l < field.modes(); ++l) {
    const double c = xi_energy_coefficient(grid, l, frac.c_frak(), ew);
    const auto m = field.mode(l);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * m[i] * m[i];
  }
  double s = 0.0;
  for (double v : acc) s += v;
  return s;
}

inline EnergyBreakdown mbodje_energy(const BeamState &state, const XiField &field, const XiGrid &grid,
                                     const DiscreteOperators &ops, const FractionalParams &frac,
                                     XiEnergyWeight ew = XiEnergyWeight::one) {
  return make_energy(kinetic_energy(state), elastic_energy(state, ops), xi_field_energy(field, grid, frac, ew));
}

/// -dt c sum_l w_l (xi_l^2 + eta) |(Phi^n_l + Phi^{n+1}_l)/2|^2
inline double dissipation_rhs(const XiField &field_n, const XiField &field_np1, const XiGrid &grid,
                              const FractionalParams &frac) {
  if (field_n.modes() != grid.size() || field_np1.modes() != grid.size() || field_n.dofs() != field_np1.dofs())
    throw std::invalid_argument("dissipation_rhs: dimension mismatch");
  std::vector<double> acc(field_n.dofs(), 0.0);
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const double c = xi_dissipation_coefficient(grid, l, frac.c_frak());
    const auto a = field_n.mode(l);
    const auto b = field_np1.mode(l);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const double mid = 0.5 * (a[i] + b[i]);
      acc[i] += c * mid * mid;
    }
  }
  double s = 0.0;
  for (double v : acc) s -= v;
  return s;
}

/// Energy change of one GL step implied by the equation of motion:
/// -dt V^{n+1/2} . (G^n + G^{n+1}) / 2 with G the discrete damping force.
inline double gl_dissipation(std::span<const double> vel_n, std::span<const double> vel_np1,
                             std::span<const double> force_n, std::span<const double> force_np1, double dt) {
  double s = 0.0;
  for (std::size_t i = 0; i < vel_n.size(); ++i)
    s += 0.5 * (vel_n[i] + vel_np1[i]) * 0.5 * (force_n[i] + force_np1[i]);
  return -dt * s;
}

struct TimeSeriesRecord {
  double t = 0.0;
  EnergyBreakdown energy;
  double identity_residual = 0.0;  // largest |dE - predicted dE| since the previous record
};

using TimeSeries = std::vector<TimeSeriesRecord>;

struct MonotonicityReport {
  std::size_t violations = 0;
  std::vector<std::size_t> indices;  // record index i with E_i - E_{i-1} > slack E_0
  double max_increase = -std::numeric_limits<double>::infinity();
};

inline MonotonicityReport monotonicity_report(std::span<const double> energies, double slack = 1e-12) {
  if (energies.size() < 2) throw std::invalid_argument("monotonicity_report: need at least two records");
  MonotonicityReport r;
  const double tol = slack * energies[0];
  for (std::size_t i = 1; i < energies.size(); ++i) {
    const double d = energies[i] - energies[i - 1];
    r.max_increase = std::max(r.max_increase, d);
    if (d > tol) {
      ++r.violations;
      r.indices.push_back(i);
    }
  }
  return r;
}

inline MonotonicityReport monotonicity_report(const TimeSeries &series, double slack = 1e-12) {
  std::vector<double> e;
  e.reserve(series.size());
  for (const auto &rec : series) e.push_back(rec.energy.total);
  return monotonicity_report(e, slack);
}

struct DecayFit {
  double c_const = 0.0;
  double p_rate = 0.0;
  double residual = 0.0;  // RMS of log residuals
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t samples = 0;
};

class FitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Least squares of log E against log(1 + t) over samples with t >= t_min and E > 0.
inline DecayFit fit_power_law(std::span<const double> t, std::span<const double> e, double t_min) {
  if (t.size() != e.size()) throw std::invalid_argument("fit_power_law: length mismatch");
  std::vector<double> xs, ys;
  double t_lo = std::numeric_limits<double>::infinity(), t_hi = -t_lo;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min || !(e[i] > 0.0) || !std::isfinite(e[i])) continue;
    xs.push_back(std::log1p(t[i]));
    ys.push_back(std::log(e[i]));
    t_lo = std::min(t_lo, t[i]);
    t_hi = std::max(t_hi, t[i]);
  }
  if (xs.size() < 10) throw FitError("fit_power_law: fewer than 10 usable samples");
  const double m = static_cast<double>(xs.size());
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= m;
  ybar /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) throw FitError("fit_power_law: degenerate time window");
  DecayFit fit;
  fit.p_rate = sxy / sxx;
  const double intercept = ybar - fit.p_rate * xbar;
  fit.c_const = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + fit.p_rate * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  fit.t_min = t_lo;
  fit.t_max = t_hi;
  fit.samples = xs.size();
  return fit;
}

inline DecayFit fit_power_law(const TimeSeries &series, double t_min) {
  std::vector<double> t, e;
  for (const auto &rec : series) {
    t.push_back(rec.t);
    e.push_back(rec.energy.total);
  }
  return fit_power_law(t, e, t_min);
}

}  // namespace raonakra

#endif  // RAONAKRA_DIAGNOSTICS_HPP
