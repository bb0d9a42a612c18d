#ifndef RAONAKRA_NEWMARK_HPP
#define RAONAKRA_NEWMARK_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "banded.hpp"
#include "model.hpp"

namespace raonakra {

/// Known part of the displacement update: U + dt V + (1/2 - beta) dt^2 A.
inline void newmark_displacement_predictor(const BeamState &s, double dt, const NewmarkParams &nm,
                                           std::span<double> out) {
  const double c2 = (0.5 - nm.beta_tilde) * dt * dt;
  for (std::size_t i = 0; i < s.dofs(); ++i)
    out[i] = s.u_disp[i] + dt * s.u_vel[i] + c2 * s.u_acc[i];
}

inline void newmark_displacement_predictor(const BeamState &s, double dt, const NewmarkParams &nm,
                                           std::span<extended> out) {
  const extended c2 = (0.5L - nm.beta_tilde) * dt * dt;
  for (std::size_t i = 0; i < s.dofs(); ++i)
    out[i] = s.u_disp[i] + static_cast<extended>(dt) * s.u_vel[i] + c2 * s.acc(i);
}

/// Advances (U, V, A) given the solved acceleration at the next level.
inline void newmark_update(BeamState &s, std::span<const double> acc_next, double dt,
                           const NewmarkParams &nm) {
  if (acc_next.size() != s.dofs()) throw std::invalid_argument("newmark_update: dimension mismatch");
  const double b = nm.beta_tilde, g = nm.gamma_tilde;
  const double dt2 = dt * dt;
  for (std::size_t i = 0; i < s.dofs(); ++i) {
    const double a0 = s.u_acc[i];
    const double a1 = acc_next[i];
    s.u_disp[i] += dt * s.u_vel[i] + (0.5 - b) * dt2 * a0 + b * dt2 * a1;
    s.u_vel[i] += (1.0 - g) * dt * a0 + g * dt * a1;
    s.u_acc[i] = a1;
  }
  s.u_acc_lo.clear();
  s.t += dt;
}

/// Same update carried out in extended precision. U and V are rounded to
/// double; A keeps its low part so that K (U + ... + beta dt^2 A) stays
/// consistent on stiff grids.
inline void newmark_update(BeamState &s, std::span<const extended> acc_next, double dt,
                           const NewmarkParams &nm) {
  if (acc_next.size() != s.dofs()) throw std::invalid_argument("newmark_update: dimension mismatch");
  const extended g = nm.gamma_tilde, h = dt;
  const extended c2 = (0.5L - nm.beta_tilde) * h * h;
  // same rounding as the stiffness scale of the effective matrix
  const extended bdt2 = nm.beta_tilde * dt * dt;
  for (std::size_t i = 0; i < s.dofs(); ++i) {
    const extended a0 = s.acc(i);
    const extended a1 = acc_next[i];
    s.u_disp[i] = static_cast<double>(s.u_disp[i] + h * s.u_vel[i] + c2 * a0 + bdt2 * a1);
    s.u_vel[i] = static_cast<double>(s.u_vel[i] + (1.0L - g) * h * a0 + g * h * a1);
    s.set_acc(i, a1);
  }
  s.t += dt;
}

}  // namespace raonakra

#endif  // RAONAKRA_NEWMARK_HPP
