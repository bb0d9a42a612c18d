#ifndef RAONAKRA_DISCRETIZATION_HPP
#define RAONAKRA_DISCRETIZATION_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "banded.hpp"
#include "model.hpp"

namespace raonakra {

/// Boundary closure of the fourth-difference stencil at the clamped ends.
enum class D4Closure {
  zero_ghost,  // w_{-1} = w_{J+2} = 0
  reflection,  // w_{-1} = w_1, w_{J+2} = w_J
};

/// Second difference (1, -2, 1) / dx^2 with u_0 = u_{J+1} = 0.
inline SymBandMatrix build_d2(const SpatialGrid &sgrid) {
  const std::size_t n = sgrid.j_count();
  if (n < 3) throw ConfigError("build_d2: J >= 3 required");
  const double s = 1.0 / (sgrid.dx() * sgrid.dx());
  SymBandMatrix d2(n, 1);
  for (std::size_t j = 0; j < n; ++j) {
    d2.set(j, j, -2.0 * s);
    if (j + 1 < n) d2.set(j + 1, j, s);
  }
  return d2;
}

/// Fourth difference (1, -4, 6, -4, 1) / dx^4 with w_0 = w_{J+1} = 0 and the
/// chosen outer ghost closure.
inline SymBandMatrix build_d4(const SpatialGrid &sgrid, D4Closure closure = D4Closure::zero_ghost) {
  const std::size_t n = sgrid.j_count();
  if (n < 3) throw ConfigError("build_d4: J >= 3 required");
  const double dx2 = sgrid.dx() * sgrid.dx();
  const double s = 1.0 / (dx2 * dx2);
  SymBandMatrix d4(n, 2);
  for (std::size_t j = 0; j < n; ++j) {
    d4.set(j, j, 6.0 * s);
    if (j + 1 < n) d4.set(j + 1, j, -4.0 * s);
    if (j + 2 < n) d4.set(j + 2, j, 1.0 * s);
  }
  if (closure == D4Closure::reflection) {
    d4.add(0, 0, s);
    d4.add(n - 1, n - 1, s);
  }
  return d4;
}

/// Upper-triangular R with R^T R = -D2.
inline UpperBandMatrix cholesky_factor_r(const SymBandMatrix &d2) {
  SymBandMatrix neg(d2.size(), d2.half_bandwidth());
  for (std::size_t i = 0; i < d2.size(); ++i) {
    const std::size_t j0 = i > d2.half_bandwidth() ? i - d2.half_bandwidth() : 0;
    for (std::size_t j = j0; j <= i; ++j) neg.set(i, j, -d2(i, j));
  }
  return BandCholesky(neg).upper_factor();
}

/// Maps between block order [u; v; w] (index b*J + j) and the interleaved
/// order (3j + b) used to keep the stiffness band narrow.
struct DofLayout {
  std::size_t j_count = 0;

  std::size_t dofs() const { return 3 * j_count; }
  std::size_t interleaved(std::size_t block_index) const {
    return 3 * (block_index % j_count) + block_index / j_count;
  }
  std::size_t block(std::size_t interleaved_index) const {
    return (interleaved_index % 3) * j_count + interleaved_index / 3;
  }
  void to_interleaved(std::span<const double> blk, std::span<double> il) const {
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t j = 0; j < j_count; ++j) il[3 * j + b] = blk[b * j_count + j];
  }
  void to_block(std::span<const double> il, std::span<double> blk) const {
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t j = 0; j < j_count; ++j) blk[b * j_count + j] = il[3 * j + b];
  }
};

/// Symmetric 3J x 3J operator addressed in block order [u; v; w] and stored as
/// a band matrix in interleaved order.
class BlockOperator {
public:
  BlockOperator() = default;
  BlockOperator(DofLayout layout, SymBandMatrix interleaved)
      : layout_(layout), band_(std::move(interleaved)) {
    if (band_.size() != layout_.dofs()) throw std::invalid_argument("BlockOperator: size mismatch");
  }

  std::size_t size() const { return layout_.dofs(); }
  const DofLayout &layout() const { return layout_; }
  const SymBandMatrix &interleaved() const { return band_; }

  double operator()(std::size_t i, std::size_t j) const {
    return band_(layout_.interleaved(i), layout_.interleaved(j));
  }

  void matvec(std::span<const double> x, std::span<double> y) const {
    std::vector<double> xi(size()), yi(size());
    layout_.to_interleaved(x, xi);
    band_.matvec(xi, yi);
    layout_.to_block(yi, y);
  }
  std::vector<double> matvec(std::span<const double> x) const {
    std::vector<double> y(size());
    matvec(x, y);
    return y;
  }
  void matvec_extended(std::span<const extended> x, std::span<extended> y) const {
    std::vector<extended> xi(size()), yi(size());
    for (std::size_t i = 0; i < size(); ++i) xi[layout_.interleaved(i)] = x[i];
    band_.matvec_extended(xi, yi);
    for (std::size_t i = 0; i < size(); ++i) y[i] = yi[layout_.interleaved(i)];
  }
  std::vector<extended> matvec_extended(std::span<const extended> x) const {
    std::vector<extended> y(size());
    matvec_extended(x, y);
    return y;
  }
  double quadratic_form(std::span<const double> x) const {
    const std::vector<double> y = matvec(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += x[i] * y[i];
    return acc;
  }

  /// Half bandwidth measured in block order.
  std::size_t block_bandwidth() const {
    std::size_t bw = 0;
    const std::size_t n = size();
    const std::size_t kd = band_.half_bandwidth();
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p > kd ? p - kd : 0; q <= p; ++q) {
        if (band_(p, q) == 0.0) continue;
        const std::size_t i = layout_.block(p), j = layout_.block(q);
        bw = std::max(bw, i > j ? i - j : j - i);
      }
    return bw;
  }

  std::vector<double> to_dense() const {
    const std::size_t n = size();
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = (*this)(i, j);
    return d;
  }

private:
  DofLayout layout_;
  SymBandMatrix band_;
};

/// Factorization of (diag_shift I + stiffness_scale K), solved in block order.
class EffectiveSystem {
public:
  EffectiveSystem() = default;
  EffectiveSystem(const BlockOperator &k, double diag_shift, double stiffness_scale)
      : layout_(k.layout()), diag_shift_(diag_shift), stiffness_scale_(stiffness_scale) {
    const SymBandMatrix &kb = k.interleaved();
    SymBandMatrix a(kb.size(), kb.half_bandwidth());
    for (std::size_t i = 0; i < kb.size(); ++i) {
      const std::size_t j0 = i > kb.half_bandwidth() ? i - kb.half_bandwidth() : 0;
      for (std::size_t j = j0; j <= i; ++j) a.set(i, j, stiffness_scale * kb(i, j));
      a.add(i, i, diag_shift);
    }
    chol_ = BandCholesky(a);
    k_ = kb;
  }

  double diag_shift() const { return diag_shift_; }
  double stiffness_scale() const { return stiffness_scale_; }

  void solve(std::span<const double> rhs, std::span<double> x) const {
    std::vector<double> il(layout_.dofs());
    layout_.to_interleaved(rhs, il);
    chol_.solve_in_place(il);
    layout_.to_block(il, x);
  }
  std::vector<double> solve(std::span<const double> rhs) const {
    std::vector<double> x(layout_.dofs());
    solve(rhs, x);
    return x;
  }

  /// Solve followed by one refinement sweep. The residual b - (s I + c K) x is
  /// formed in extended precision from K itself: the stored s + c K_ii loses
  /// the digits of s once c K_ii is large.
  std::vector<extended> solve_extended(std::span<const extended> rhs) const {
    const std::size_t n = layout_.dofs();
    std::vector<extended> b(n);
    for (std::size_t i = 0; i < n; ++i) b[layout_.interleaved(i)] = rhs[i];
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(b[i]);
    chol_.solve_in_place(x);
    std::vector<extended> xe(x.begin(), x.end()), kx(n);
    const extended s = diag_shift_, c = stiffness_scale_;
    k_.matvec_extended(xe, kx);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<double>(b[i] - s * xe[i] - c * kx[i]);
    chol_.solve_in_place(r);
    std::vector<extended> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = xe[layout_.interleaved(i)] + r[layout_.interleaved(i)];
    return out;
  }

private:
  DofLayout layout_;
  double diag_shift_ = 0.0;
  double stiffness_scale_ = 0.0;
  BandCholesky chol_;
  SymBandMatrix k_;
};

struct DiscreteOperators {
  SpatialGrid sgrid;
  BeamParams params;
  SymBandMatrix d2;
  SymBandMatrix d4;
  UpperBandMatrix r_factor;
  BlockOperator k_stiff;

  std::size_t j_count() const { return sgrid.j_count(); }
  std::size_t dofs() const { return 3 * sgrid.j_count(); }
};

/// K = blockdiag(-theta D2, -chi D2, zeta D4) + k S^T S with S = [-I, I, gamma R].
inline BlockOperator assemble_stiffness(const BeamParams &params, const SymBandMatrix &d2,
                                        const SymBandMatrix &d4, const UpperBandMatrix &r) {
  const std::size_t n = d2.size();
  if (d4.size() != n || r.size() != n || d2.half_bandwidth() > 1 || d4.half_bandwidth() > 2 ||
      r.bandwidth() > 1)
    throw std::invalid_argument("assemble_stiffness: dimension mismatch");

  const DofLayout layout{n};
  constexpr std::size_t U = 0, V = 1, W = 2;
  auto at = [](std::size_t j, std::size_t b) { return 3 * j + b; };
  SymBandMatrix kb(3 * n, 6);
  const double k = params.k;
  const double g = params.gamma;

  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t q = (j > 1 ? j - 2 : 0); q <= j; ++q) {
      if (j - q <= 1) {
        kb.add(at(j, U), at(q, U), -params.theta * d2(j, q));
        kb.add(at(j, V), at(q, V), -params.chi * d2(j, q));
      }
      kb.add(at(j, W), at(q, W), params.zeta * d4(j, q));
    }
    // -u + v blocks of S^T S
    kb.add(at(j, U), at(j, U), k);
    kb.add(at(j, V), at(j, V), k);
    kb.add(at(j, V), at(j, U), -k);
  }
  // (u, w) = -k gamma R, (v, w) = +k gamma R
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j <= std::min(n - 1, i + 1); ++j) {
      const double rij = r(i, j);
      kb.add(at(i, U), at(j, W), -k * g * rij);
      kb.add(at(i, V), at(j, W), k * g * rij);
    }
  }
  // (w, w) += k gamma^2 R^T R, R upper bidiagonal
  for (std::size_t j = 0; j < n; ++j) {
    double diag = r(j, j) * r(j, j);
    if (j > 0) diag += r(j - 1, j) * r(j - 1, j);
    kb.add(at(j, W), at(j, W), k * g * g * diag);
    if (j + 1 < n) kb.add(at(j + 1, W), at(j, W), k * g * g * r(j, j) * r(j, j + 1));
  }
  return BlockOperator(layout, std::move(kb));
}

inline DiscreteOperators build_operators(const SpatialGrid &sgrid, const BeamParams &params,
                                         D4Closure closure = D4Closure::zero_ghost) {
  DiscreteOperators ops;
  ops.sgrid = sgrid;
  ops.params = params;
  ops.d2 = build_d2(sgrid);
  ops.d4 = build_d4(sgrid, closure);
  ops.r_factor = cholesky_factor_r(ops.d2);
  ops.k_stiff = assemble_stiffness(params, ops.d2, ops.d4, ops.r_factor);
  return ops;
}

/// Discrete shear strain s = -u + v + gamma R w.
inline std::vector<double> shear_vector(std::span<const double> u_disp, const DiscreteOperators &ops) {
  const std::size_t n = ops.j_count();
  if (u_disp.size() != 3 * n) throw std::invalid_argument("shear_vector: dimension mismatch");
  std::vector<double> s(n);
  ops.r_factor.apply(u_disp.subspan(2 * n, n), s);
  for (std::size_t j = 0; j < n; ++j)
    s[j] = -u_disp[j] + u_disp[n + j] + ops.params.gamma * s[j];
  return s;
}

inline std::vector<double> shear_vector(const BeamState &state, const DiscreteOperators &ops) {
  return shear_vector(std::span<const double>(state.u_disp), ops);
}

}  // namespace raonakra

#endif  // RAONAKRA_DISCRETIZATION_HPP
