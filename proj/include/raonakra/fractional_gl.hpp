#ifndef RAONAKRA_FRACTIONAL_GL_HPP
#define RAONAKRA_FRACTIONAL_GL_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "discretization.hpp"
#include "model.hpp"
#include "newmark.hpp"

namespace raonakra {

inline double gamma_eval(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_eval: argument must be positive");
  return std::tgamma(x);
}

namespace detail {

// (m+1)^p + (m-1)^p - 2 m^p, evaluated without the leading-order cancellation.
inline double second_difference_pow(std::size_t m, double p) {
  if (m == 0) throw std::invalid_argument("second_difference_pow: m >= 1");
  if (m == 1) return std::pow(2.0, p) - 2.0;
  const double md = static_cast<double>(m);
  const double h = 1.0 / md;
  return std::pow(md, p) * (std::expm1(p * std::log1p(h)) + std::expm1(p * std::log1p(-h)));
}

// (n-1)^p - (n-2+alpha) n^{p-1} with p = 2 - alpha.
inline double first_weight(std::size_t n, double alpha) {
  const double p = 2.0 - alpha;
  if (n == 1) return 1.0 - alpha;  // 0 - (alpha - 1)
  const double nd = static_cast<double>(n);
  return std::pow(nd, p - 1.0) * (nd * std::expm1(p * std::log1p(-1.0 / nd)) + p);
}

}  // namespace detail

/// Fractional trapezoidal weights a_{0,n} .. a_{n,n}.
inline std::vector<double> gl_coefficients(std::size_t n, double alpha, double dt) {
  if (n == 0) throw std::invalid_argument("gl_coefficients: n >= 1 required");
  const double p = 2.0 - alpha;
  const double pref = std::pow(dt, 1.0 - alpha) / gamma_eval(3.0 - alpha);
  std::vector<double> a(n + 1);
  a[0] = pref * detail::first_weight(n, alpha);
  for (std::size_t k = 1; k < n; ++k) a[k] = pref * detail::second_difference_pow(n - k, p);
  a[n] = pref;
  return a;
}

/// sum_k a_{k,n} e^{-eta dt (n-k)} f'(t_k) for samples f'(t_0) .. f'(t_n).
inline double caputo_trapezoid(std::span<const double> fprime, double alpha, double eta, double dt) {
  if (fprime.size() < 2) throw std::invalid_argument("caputo_trapezoid: need at least two samples");
  const std::size_t n = fprime.size() - 1;
  const std::vector<double> a = gl_coefficients(n, alpha, dt);
  double acc = 0.0;
  for (std::size_t k = 0; k <= n; ++k)
    acc += a[k] * std::exp(-eta * dt * static_cast<double>(n - k)) * fprime[k];
  return acc;
}

/// Velocity history plus cached lag-dependent weights.
class GlHistory {
public:
  GlHistory() = default;
  GlHistory(double alpha, double eta, double dt)
      : alpha_(alpha), eta_(eta), dt_(dt),
        pref_(std::pow(dt, 1.0 - alpha) / gamma_eval(3.0 - alpha)) {}

  double alpha() const { return alpha_; }
  double eta() const { return eta_; }
  double dt() const { return dt_; }
  /// dt^{1-alpha} / Gamma(3-alpha), the weight of the newest sample.
  double prefactor() const { return pref_; }

  std::size_t size() const { return vel_history_.size(); }
  bool empty() const { return vel_history_.empty(); }
  const std::vector<double> &velocity(std::size_t k) const { return vel_history_.at(k); }

  void push(std::span<const double> vel) {
    vel_history_.emplace_back(vel.begin(), vel.end());
    grow_cache(vel_history_.size());
  }

  /// pref * second difference at lag m, times e^{-eta dt m}.
  double lag_weight(std::size_t m) const { return lag_weights_.at(m); }
  double decay(std::size_t m) const { return decay_.at(m); }

private:
  void grow_cache(std::size_t upto) {
    const double p = 2.0 - alpha_;
    while (decay_.size() <= upto) {
      const std::size_t m = decay_.size();
      decay_.push_back(std::exp(-eta_ * dt_ * static_cast<double>(m)));
      lag_weights_.push_back(m == 0 ? pref_ : pref_ * detail::second_difference_pow(m, p) * decay_.back());
    }
  }

  double alpha_ = 0.5;
  double eta_ = 0.0;
  double dt_ = 0.0;
  double pref_ = 0.0;
  std::vector<std::vector<double>> vel_history_;
  std::vector<double> lag_weights_;
  std::vector<double> decay_;
};

/// sum_{k=0}^{n} a_{k,n+1} e^{-eta dt (n+1-k)} V^k, with hist holding V^0 .. V^n.
inline std::vector<double> gl_history_term(const GlHistory &hist, std::size_t n) {
  if (hist.empty()) throw std::invalid_argument("gl_history_term: empty history");
  if (hist.size() != n + 1) throw std::invalid_argument("gl_history_term: history length must be n+1");
  const std::size_t dofs = hist.velocity(0).size();
  std::vector<double> out(dofs, 0.0);
  const std::size_t np1 = n + 1;
  {
    const double w = hist.prefactor() * detail::first_weight(np1, hist.alpha()) * hist.decay(np1);
    const auto &v = hist.velocity(0);
    for (std::size_t i = 0; i < dofs; ++i) out[i] += w * v[i];
  }
  for (std::size_t k = 1; k <= n; ++k) {
    const double w = hist.lag_weight(np1 - k);
    const auto &v = hist.velocity(k);
    for (std::size_t i = 0; i < dofs; ++i) out[i] += w * v[i];
  }
  return out;
}

/// (1 + gamma dt^{2-alpha} / Gamma(3-alpha) C) I + beta dt^2 K with C = damping_scale,
/// factorized once.
inline EffectiveSystem gl_effective_matrix(const DiscreteOperators &ops, const FractionalParams &frac,
                                           const TimeGrid &tgrid, const NewmarkParams &nm,
                                           double damping_scale = 1.0) {
  const double dt = tgrid.dt();
  const double c = damping_scale * nm.gamma_tilde * std::pow(dt, 2.0 - frac.alpha()) /
                   gamma_eval(3.0 - frac.alpha());
  return EffectiveSystem(ops.k_stiff, 1.0 + c, nm.beta_tilde * dt * dt);
}

/// Damping force carried along for energy bookkeeping.
struct GlStepInfo {
  std::vector<double> damping_force;  // approximation of the fractional derivative at t_{n+1}
};

/// One implicit step. `hist` must hold V^0 .. V^n on entry; V^{n+1} is appended.
/// The damping matrix is damping_scale * I.
inline GlStepInfo gl_step(BeamState &state, GlHistory &hist, const EffectiveSystem &eff,
                          const DiscreteOperators &ops, const TimeGrid &tgrid, const NewmarkParams &nm,
                          double damping_scale = 1.0) {
  const std::size_t dofs = state.dofs();
  if (hist.empty()) throw std::invalid_argument("gl_step: history must contain the initial velocity");
  const std::size_t n = hist.size() - 1;
  const double dt = tgrid.dt();
  const double pref = hist.prefactor();

  std::vector<double> history = gl_history_term(hist, n);
  for (double &h : history) h *= damping_scale;
  std::vector<extended> pred(dofs);
  newmark_displacement_predictor(state, dt, nm, pred);
  std::vector<extended> rhs = ops.k_stiff.matvec_extended(pred);
  const extended c1 = (1.0L - nm.gamma_tilde) * dt;
  const extended sp = static_cast<extended>(damping_scale) * pref;
  for (std::size_t i = 0; i < dofs; ++i)
    rhs[i] = -rhs[i] - sp * (state.u_vel[i] + c1 * state.acc(i)) - history[i];

  const std::vector<extended> acc = eff.solve_extended(rhs);
  newmark_update(state, acc, dt, nm);
  hist.push(state.u_vel);

  GlStepInfo info;
  info.damping_force = std::move(history);
  for (std::size_t i = 0; i < dofs; ++i) info.damping_force[i] += damping_scale * pref * state.u_vel[i];
  return info;
}

}  // namespace raonakra

#endif  // RAONAKRA_FRACTIONAL_GL_HPP
