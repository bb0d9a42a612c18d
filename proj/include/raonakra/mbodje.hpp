#ifndef RAONAKRA_MBODJE_HPP
#define RAONAKRA_MBODJE_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "discretization.hpp"
#include "model.hpp"
#include "newmark.hpp"

namespace raonakra {

/// Placement of the xi nodes and sampling of the density mu.
enum class XiNodes {
  right_point,    // xi_l = l dxi, mu_l = xi_l^{(2 alpha - 1)/2}
  midpoint_cell,  // xi_l = (l - 1/2) dxi, mu_l^2 = cell average of |xi|^{2 alpha - 1}
};

/// Quadrature weight attached to each node.
enum class XiWeighting {
  full_line,  // 2 dxi: node l stands for +xi_l and -xi_l
  dxi,        // dxi: half line only
  none,       // 1: bare sums
};

/// Weight of |Phi_l|^2 in the auxiliary energy.
enum class XiEnergyWeight {
  one,  // closes the discrete energy balance exactly
  mu,   // mu_l |Phi_l|^2
};

struct XiQuadrature {
  XiNodes nodes = XiNodes::midpoint_cell;
  XiWeighting weighting = XiWeighting::full_line;
};

/// Uniform xi grid together with the per-mode Crank-Nicolson coefficients for
/// a fixed (dt, eta).
struct XiGrid {
  XiQuadrature quadrature;
  double dxi = 0.0;
  double xi_max = 0.0;
  double dt = 0.0;
  double eta = 0.0;
  std::vector<double> xi;
  std::vector<double> mu;
  std::vector<double> mu_tilde;  // (2 - a_l)/(2 + a_l) mu_l, a_l = dt (xi_l^2 + eta)
  std::vector<double> weight;    // quadrature weight w_l
  std::vector<double> amp;       // (2 - a_l)/(2 + a_l)
  std::vector<double> gain;      // 2 dt mu_l / (2 + a_l)

  std::size_t size() const { return xi.size(); }
};

inline XiGrid build_xi_grid(double alpha, double eta, double dt, double xi_max, std::size_t m_count,
                            XiQuadrature quad = {}) {
  if (!(xi_max > 0.0) || m_count == 0 || !(dt > 0.0) || !(eta >= 0.0) || !(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("build_xi_grid: xi_max, m_count, dt must be positive, eta >= 0, alpha in (0,1)");
  XiGrid g;
  g.quadrature = quad;
  g.xi_max = xi_max;
  g.dxi = xi_max / static_cast<double>(m_count);
  g.dt = dt;
  g.eta = eta;
  const double expo = (2.0 * alpha - 1.0) / 2.0;
  const double w = quad.weighting == XiWeighting::full_line ? 2.0 * g.dxi
                   : quad.weighting == XiWeighting::dxi     ? g.dxi
                                                            : 1.0;
  g.xi.resize(m_count);
  g.mu.resize(m_count);
  g.mu_tilde.resize(m_count);
  g.weight.assign(m_count, w);
  g.amp.resize(m_count);
  g.gain.resize(m_count);
  for (std::size_t l = 0; l < m_count; ++l) {
    const double ld = static_cast<double>(l + 1);
    if (quad.nodes == XiNodes::right_point) {
      g.xi[l] = ld * g.dxi;
      g.mu[l] = std::pow(g.xi[l], expo);
    } else {
      g.xi[l] = (ld - 0.5) * g.dxi;
      const double lo = (ld - 1.0) * g.dxi, hi = ld * g.dxi;
      const double avg = (std::pow(hi, 2.0 * alpha) - std::pow(lo, 2.0 * alpha)) / (2.0 * alpha * g.dxi);
      g.mu[l] = std::sqrt(avg);
    }
    const double a = dt * (g.xi[l] * g.xi[l] + eta);
    g.amp[l] = (2.0 - a) / (2.0 + a);
    g.mu_tilde[l] = g.amp[l] * g.mu[l];
    g.gain[l] = 2.0 * dt * g.mu[l] / (2.0 + a);
  }
  return g;
}

/// Auxiliary unknowns Phi_l in R^{3J}, stored mode-major, plus a cached copy
/// of c sum_l w_l mu~_l Phi_l.
class XiField {
public:
  XiField() = default;
  XiField(std::size_t modes, std::size_t dofs) : modes_(modes), dofs_(dofs), phi_(modes * dofs, 0.0) {}

  std::size_t modes() const { return modes_; }
  std::size_t dofs() const { return dofs_; }
  std::span<const double> mode(std::size_t l) const { return {phi_.data() + l * dofs_, dofs_}; }
  std::span<const double> data() const { return phi_; }

  /// Mutable access; drops the cached force.
  std::span<double> mutable_mode(std::size_t l) {
    cache_valid_ = false;
    return {phi_.data() + l * dofs_, dofs_};
  }

private:
  friend std::vector<double> coupling_force(const XiField &, const XiGrid &, const FractionalParams &);
  friend struct MbodjeKernel;

  std::size_t modes_ = 0;
  std::size_t dofs_ = 0;
  std::vector<double> phi_;
  mutable std::vector<double> cached_force_;
  mutable bool cache_valid_ = false;
};

/// c sum_l w_l mu~_l Phi_l, the known part of the damping force at the next level.
inline std::vector<double> coupling_force(const XiField &field, const XiGrid &grid, const FractionalParams &frac) {
  if (field.modes() != grid.size()) throw std::invalid_argument("coupling_force: mode count mismatch");
  if (field.cache_valid_) return field.cached_force_;
  std::vector<double> f(field.dofs(), 0.0);
  const double c = frac.c_frak();
  for (std::size_t l = 0; l < field.modes(); ++l) {
    const double s = c * grid.weight[l] * grid.mu_tilde[l];
    const auto m = field.mode(l);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += s * m[i];
  }
  field.cached_force_ = f;
  field.cache_valid_ = true;
  return f;
}

/// c sum_l w_l mu_l Phi_l, the damping force represented by the current field.
inline std::vector<double> damping_force(const XiField &field, const XiGrid &grid, const FractionalParams &frac) {
  std::vector<double> f(field.dofs(), 0.0);
  const double c = frac.c_frak();
  for (std::size_t l = 0; l < field.modes(); ++l) {
    const double s = c * grid.weight[l] * grid.mu[l];
    const auto m = field.mode(l);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += s * m[i];
  }
  return f;
}

/// dt c sum_l w_l mu_l^2 / (2 + a_l). The implicit part of the damping force is
/// this scalar times (2 V^n + (1 - gamma) dt A^n + gamma dt A^{n+1}).
inline double c_augm_scalar(const XiGrid &grid, const FractionalParams &frac) {
  double s = 0.0;
  for (std::size_t l = 0; l < grid.size(); ++l) {
    const double a = grid.dt * (grid.xi[l] * grid.xi[l] + grid.eta);
    s += grid.weight[l] * grid.mu[l] * grid.mu[l] / (2.0 + a);
  }
  return grid.dt * frac.c_frak() * s;
}

inline double xi_energy_coefficient(const XiGrid &grid, std::size_t l, double c_frak, XiEnergyWeight ew) {
  return 0.5 * c_frak * grid.weight[l] * (ew == XiEnergyWeight::mu ? grid.mu[l] : 1.0);
}

inline double xi_dissipation_coefficient(const XiGrid &grid, std::size_t l, double c_frak) {
  return grid.dt * c_frak * grid.weight[l] * (grid.xi[l] * grid.xi[l] + grid.eta);
}

struct MbodjeStepInfo {
  double dissipation = 0.0;  // -dt c sum_l w_l (xi_l^2 + eta) |Phi_l^{n+1/2}|^2
  double xi_energy = 0.0;    // auxiliary energy of the updated field
};

/// Fused Crank-Nicolson sweep over all modes.
struct MbodjeKernel {
  static MbodjeStepInfo update(XiField &field, std::span<const double> vel_mid, const XiGrid &grid,
                               const FractionalParams &frac, XiEnergyWeight ew) {
    const std::size_t dofs = field.dofs();
    if (field.modes() != grid.size() || vel_mid.size() != dofs)
      throw std::invalid_argument("phi_update: dimension mismatch");
    std::vector<double> force(dofs, 0.0), diss(dofs, 0.0), energy(dofs, 0.0);
    const double c = frac.c_frak();
    const double *vm = vel_mid.data();
    double *fo = force.data();
    double *di = diss.data();
    double *en = energy.data();
    for (std::size_t l = 0; l < field.modes(); ++l) {
      const double r = grid.amp[l];
      const double q = grid.gain[l];
      const double fw = c * grid.weight[l] * grid.mu_tilde[l];
      const double dw = xi_dissipation_coefficient(grid, l, c);
      const double ewl = xi_energy_coefficient(grid, l, c, ew);
      double *p = field.phi_.data() + l * dofs;
      for (std::size_t i = 0; i < dofs; ++i) {
        const double old = p[i];
        const double nw = r * old + q * vm[i];
        p[i] = nw;
        const double mid = 0.5 * (old + nw);
        fo[i] += fw * nw;
        di[i] += dw * mid * mid;
        en[i] += ewl * nw * nw;
      }
    }
    MbodjeStepInfo info;
    for (std::size_t i = 0; i < dofs; ++i) {
      info.dissipation -= diss[i];
      info.xi_energy += energy[i];
    }
    field.cached_force_ = std::move(force);
    field.cache_valid_ = true;
    return info;
  }
};

/// Phi_l <- amp_l Phi_l + gain_l vel_mid for every mode.
inline MbodjeStepInfo phi_update(XiField &field, std::span<const double> vel_mid, const XiGrid &grid,
                                 const FractionalParams &frac, XiEnergyWeight ew = XiEnergyWeight::one) {
  return MbodjeKernel::update(field, vel_mid, grid, frac, ew);
}

/// (1 + gamma dt C_augm) I + beta dt^2 K.
inline EffectiveSystem mbodje_effective_matrix(const DiscreteOperators &ops, const XiGrid &grid,
                                               const FractionalParams &frac, const NewmarkParams &nm) {
  const double dt = grid.dt;
  return EffectiveSystem(ops.k_stiff, 1.0 + nm.gamma_tilde * dt * c_augm_scalar(grid, frac),
                         nm.beta_tilde * dt * dt);
}

/// One step of the augmented scheme: solve for A^{n+1}, correct (U, V), then
/// advance Phi with the exact midpoint velocity. Equivalent to solving the
/// coupled Crank-Nicolson system for (A^{n+1}, Phi^{n+1}) simultaneously.
inline MbodjeStepInfo mbodje_step(BeamState &state, XiField &field, const EffectiveSystem &eff,
                                  const DiscreteOperators &ops, const XiGrid &grid,
                                  const FractionalParams &frac, const NewmarkParams &nm,
                                  XiEnergyWeight ew = XiEnergyWeight::one) {
  const std::size_t dofs = state.dofs();
  const double dt = grid.dt;
  const double caug = c_augm_scalar(grid, frac);

  std::vector<extended> pred(dofs);
  newmark_displacement_predictor(state, dt, nm, pred);
  std::vector<extended> rhs = ops.k_stiff.matvec_extended(pred);
  const std::vector<double> known = coupling_force(field, grid, frac);
  const extended c1 = (1.0L - nm.gamma_tilde) * dt;
  for (std::size_t i = 0; i < dofs; ++i)
    rhs[i] = -rhs[i] - known[i] - caug * (2.0L * state.u_vel[i] + c1 * state.acc(i));

  const std::vector<extended> acc = eff.solve_extended(rhs);
  std::vector<double> vel_mid(state.u_vel);
  newmark_update(state, acc, dt, nm);
  for (std::size_t i = 0; i < dofs; ++i) vel_mid[i] = 0.5 * (vel_mid[i] + state.u_vel[i]);
  return phi_update(field, vel_mid, grid, frac, ew);
}

}  // namespace raonakra

#endif  // RAONAKRA_MBODJE_HPP
