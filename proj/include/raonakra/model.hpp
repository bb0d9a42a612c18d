#ifndef RAONAKRA_MODEL_HPP
#define RAONAKRA_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace raonakra {

/// Physical coefficients of the unit-density Rao-Nakra beam.
struct BeamParams {
  double theta = 1.0;  // tension modulus of the bottom layer
  double chi = 1.0;    // tension modulus of the top layer
  double zeta = 1.0;   // bending stiffness
  double k = 1.0;      // shear coupling
  double gamma = 1.0;  // coupling geometry factor
  double ell = 1.0;    // beam length
};

/// Order and exponential weight of the damping operator.
class FractionalParams {
public:
  FractionalParams() : FractionalParams(0.5, 0.0) {}
  FractionalParams(double alpha, double eta)
      : alpha_(alpha), eta_(eta), c_frak_(std::sin(alpha * std::numbers::pi) / std::numbers::pi) {}

  double alpha() const { return alpha_; }
  double eta() const { return eta_; }
  /// sin(alpha pi) / pi
  double c_frak() const { return c_frak_; }

private:
  double alpha_;
  double eta_;
  double c_frak_;
};

class SpatialGrid {
public:
  SpatialGrid() = default;
  SpatialGrid(std::size_t j_count, double ell)
      : j_count_(j_count), ell_(ell), dx_(j_count > 0 ? ell / static_cast<double>(j_count) : 0.0) {}

  std::size_t j_count() const { return j_count_; }
  double dx() const { return dx_; }
  double ell() const { return ell_; }
  double node(std::size_t j) const { return static_cast<double>(j) * dx_; }

private:
  std::size_t j_count_ = 0;
  double ell_ = 0.0;
  double dx_ = 0.0;
};

class TimeGrid {
public:
  TimeGrid() = default;
  TimeGrid(double dt, std::size_t n_steps) : dt_(dt), n_steps_(n_steps) {}

  double dt() const { return dt_; }
  std::size_t n_steps() const { return n_steps_; }
  double t_final() const { return dt_ * static_cast<double>(n_steps_); }
  double time(std::size_t n) const { return dt_ * static_cast<double>(n); }

private:
  double dt_ = 0.0;
  std::size_t n_steps_ = 0;
};

struct NewmarkParams {
  double beta_tilde = 0.25;
  double gamma_tilde = 0.5;
};

/// Displacement, velocity and acceleration at one time level, each of length
/// 3J in block order [u; v; w].
struct BeamState {
  std::vector<double> u_disp;
  std::vector<double> u_vel;
  std::vector<double> u_acc;
  std::vector<double> u_acc_lo;  // rounding residue of u_acc from an extended solve; empty means zero
  double t = 0.0;

  BeamState() = default;
  explicit BeamState(std::size_t dofs) : u_disp(dofs, 0.0), u_vel(dofs, 0.0), u_acc(dofs, 0.0) {}

  std::size_t dofs() const { return u_disp.size(); }
  long double acc(std::size_t i) const {
    return u_acc_lo.empty() ? static_cast<long double>(u_acc[i])
                            : static_cast<long double>(u_acc[i]) + static_cast<long double>(u_acc_lo[i]);
  }
  void set_acc(std::size_t i, long double a) {
    if (u_acc_lo.size() != u_acc.size()) u_acc_lo.assign(u_acc.size(), 0.0);
    u_acc[i] = static_cast<double>(a);
    u_acc_lo[i] = static_cast<double>(a - static_cast<long double>(u_acc[i]));
  }
};

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    std::string out;
    for (const auto &v : violations) out += v.field + ": " + v.message + "\n";
    return out;
  }
};

class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string &what) : std::invalid_argument(what) {}
};

inline ValidationReport validate_config(const BeamParams &params, const FractionalParams &frac,
                                        const SpatialGrid &sgrid, const TimeGrid &tgrid) {
  ValidationReport r;
  auto need = [&r](bool ok, const char *field, const char *msg) {
    if (!ok) r.violations.push_back({field, msg});
  };
  need(params.theta > 0.0, "theta", "theta must be positive");
  need(params.chi > 0.0, "chi", "chi must be positive");
  need(params.zeta > 0.0, "zeta", "zeta must be positive");
  need(params.k >= 0.0, "k", "k must be nonnegative");
  need(std::isfinite(params.gamma), "gamma", "gamma must be finite");
  need(params.ell > 0.0, "ell", "ell must be positive");
  need(frac.alpha() > 0.0 && frac.alpha() < 1.0, "alpha", "alpha must lie in open interval (0,1)");
  need(frac.eta() >= 0.0, "eta", "eta must be nonnegative");
  need(sgrid.j_count() >= 3, "J", "J >= 3 required by D4 stencil");
  need(tgrid.dt() > 0.0, "dt", "dt must be positive");
  need(tgrid.n_steps() >= 1, "n_steps", "n_steps must be at least 1");
  return r;
}

/// Closed-form initial profiles. u vanishes at x = 0 and x = ell; w additionally
/// vanishes at ell / 2.
inline double initial_u(double x, double ell) {
  const double d = std::abs(x - ell / 2.0);
  return x * (ell * ell * ell / 8.0 - d * d * d);
}

inline double initial_w(double x, double ell) {
  const double d = std::abs(x - ell / 2.0);
  return x * (x - ell / 2.0) * (ell * ell * ell / 8.0 - d * d * d);
}

/// Samples the initial displacements on x_j = j dx, j = 1..J. Velocities and
/// accelerations are zero; the driver fills in the acceleration from the
/// equation of motion.
inline BeamState build_initial_state(const SpatialGrid &sgrid, const BeamParams &params) {
  const std::size_t j_count = sgrid.j_count();
  BeamState s(3 * j_count);
  for (std::size_t j = 0; j < j_count; ++j) {
    const double x = sgrid.node(j + 1);
    s.u_disp[j] = initial_u(x, params.ell);
    s.u_disp[2 * j_count + j] = initial_w(x, params.ell);
  }
  return s;
}

}  // namespace raonakra

#endif  // RAONAKRA_MODEL_HPP
