#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "raonakra/discretization.hpp"

using namespace raonakra;
using Catch::Approx;

namespace {

Eigen::MatrixXd dense(const std::vector<double> &d, std::size_t n) {
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = d[i * n + j];
  return m;
}

SymBandMatrix d2_by_hand(std::size_t n, double dx) {
  SymBandMatrix d(n, 1);
  for (std::size_t j = 0; j < n; ++j) {
    d.set(j, j, -2.0 / (dx * dx));
    if (j + 1 < n) d.set(j + 1, j, 1.0 / (dx * dx));
  }
  return d;
}

std::vector<double> random_vector(std::size_t n, std::mt19937 &rng) {
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (double &v : x) v = g(rng);
  return x;
}

}  // namespace

TEST_CASE("D2 stencil on J = 3, dx = 1") {
  const SymBandMatrix d2 = build_d2(SpatialGrid(3, 3.0));
  const Eigen::MatrixXd m = dense(d2.to_dense(), 3);
  Eigen::Matrix3d expect;
  expect << -2, 1, 0, 1, -2, 1, 0, 1, -2;
  CHECK(m == expect);
}

TEST_CASE("D2 interior rows sum to zero") {
  const SymBandMatrix d2 = build_d2(SpatialGrid(17, 1.3));
  const Eigen::MatrixXd m = dense(d2.to_dense(), 17);
  for (int j = 1; j < 16; ++j) CHECK(std::abs(m.row(j).sum()) < 1e-10);
}

TEST_CASE("smallest eigenvalue of -D2") {
  const std::size_t n = 200;
  const SymBandMatrix d2 = build_d2(SpatialGrid(n, 1.0));
  const Eigen::MatrixXd m = -dense(d2.to_dense(), n);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double lam = es.eigenvalues()(0);
  const double pi = std::numbers::pi;
  const double dx = 1.0 / static_cast<double>(n);
  const double s = std::sin(pi / (2.0 * static_cast<double>(n + 1)));
  CHECK(lam == Approx(4.0 * s * s / (dx * dx)).epsilon(1e-10));
  // Dirichlet nodes sit at 0 and (J+1) dx, so the limit is pi^2 on a domain of length l (1 + 1/J)
  const double stretched = pi * pi * std::pow(double(n) / double(n + 1), 2);
  CHECK(std::abs(lam - stretched) / stretched < 1e-3);
  CHECK(std::abs(lam - pi * pi) / (pi * pi) < 1.1e-2);
}

TEST_CASE("D4 stencil on J = 3, dx = 1") {
  const SymBandMatrix d4 = build_d4(SpatialGrid(3, 3.0));
  const Eigen::MatrixXd m = dense(d4.to_dense(), 3);
  Eigen::Matrix3d expect;
  expect << 6, -4, 1, -4, 6, -4, 1, -4, 6;
  CHECK(m == expect);
  CHECK(m == m.transpose());
}

TEST_CASE("reflection closure adds the ghost at both ends") {
  const SymBandMatrix z = build_d4(SpatialGrid(5, 5.0));
  const SymBandMatrix r = build_d4(SpatialGrid(5, 5.0), D4Closure::reflection);
  CHECK(r(0, 0) == 7.0);
  CHECK(r(4, 4) == 7.0);
  CHECK(r(2, 2) == z(2, 2));
}

TEST_CASE("D4 against the square of D2") {
  const std::size_t n = 12;
  const SpatialGrid g(n, 0.7);
  const Eigen::MatrixXd d4 = dense(build_d4(g).to_dense(), n);
  const Eigen::MatrixXd m2 = dense(build_d2(g).to_dense(), n);
  const Eigen::MatrixXd sq = m2 * m2;
  const double scale = d4.cwiseAbs().maxCoeff();
  // only the first and last rows differ, through the diagonal 6 vs 5
  for (std::size_t j = 1; j + 1 < n; ++j) CHECK((d4.row(j) - sq.row(j)).cwiseAbs().maxCoeff() < 1e-12 * scale);
  CHECK(std::abs(d4(0, 0) - sq(0, 0)) > 0.1 * scale);
  CHECK(std::abs(d4(n - 1, n - 1) - sq(n - 1, n - 1)) > 0.1 * scale);
}

TEST_CASE("operators reject J < 3") {
  CHECK_THROWS_AS(build_d2(SpatialGrid(2, 1.0)), ConfigError);
  CHECK_THROWS_AS(build_d4(SpatialGrid(2, 1.0)), ConfigError);
}

TEST_CASE("Cholesky factor of -D2") {
  SECTION("J = 2 by hand") {
    const UpperBandMatrix r = cholesky_factor_r(d2_by_hand(2, 1.0));
    CHECK(r(0, 0) == Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(r(0, 1) == Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(r(1, 1) == Approx(std::sqrt(1.5)).epsilon(1e-14));
    CHECK(r(1, 0) == 0.0);
  }
  SECTION("J = 1 is a scalar square root") {
    const UpperBandMatrix r = cholesky_factor_r(d2_by_hand(1, 0.25));
    CHECK(r(0, 0) == Approx(std::sqrt(2.0) / 0.25).epsilon(1e-14));
  }
  SECTION("R^T R = -D2 for several sizes") {
    for (std::size_t n : {1u, 2u, 5u, 50u, 500u}) {
      const double dx = 1.0 / static_cast<double>(n);
      const SymBandMatrix d2 = d2_by_hand(n, dx);
      const UpperBandMatrix r = cholesky_factor_r(d2);
      double worst = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = (i > 0 ? i - 1 : 0); j <= std::min(n - 1, i + 1); ++j) {
          double s = 0.0;
          for (std::size_t k = (std::max(i, j) > 0 ? std::max(i, j) - 1 : 0); k <= std::min(i, j); ++k)
            s += r(k, i) * r(k, j);
          worst = std::max(worst, std::abs(s + d2(i, j)));
          scale = std::max(scale, std::abs(d2(i, j)));
        }
      INFO("J = " << n);
      CHECK(worst <= 1e-12 * scale);
    }
  }
}

TEST_CASE("stiffness assembly") {
  const SpatialGrid g(8, 1.0);
  const std::size_t n = 8, N = 24;

  SECTION("k = 0 leaves the stress blocks") {
    BeamParams p;
    p.k = 0.0;
    p.theta = 2.0;
    p.chi = 3.0;
    p.zeta = 0.5;
    const DiscreteOperators ops = build_operators(g, p);
    const Eigen::MatrixXd k = dense(ops.k_stiff.to_dense(), N);
    const Eigen::MatrixXd d2 = dense(ops.d2.to_dense(), n), d4 = dense(ops.d4.to_dense(), n);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(N, N);
    expect.block(0, 0, n, n) = -2.0 * d2;
    expect.block(n, n, n, n) = -3.0 * d2;
    expect.block(2 * n, 2 * n, n, n) = 0.5 * d4;
    CHECK((k - expect).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("gamma = 0 coupling") {
    BeamParams p;
    p.gamma = 0.0;
    p.k = 1.5;
    BeamParams p0 = p;
    p0.k = 0.0;
    const Eigen::MatrixXd k1 = dense(build_operators(g, p).k_stiff.to_dense(), N);
    const Eigen::MatrixXd k0 = dense(build_operators(g, p0).k_stiff.to_dense(), N);
    const Eigen::MatrixXd c = k1 - k0;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(N, N);
    expect.block(0, 0, n, n) = 1.5 * I;
    expect.block(0, n, n, n) = -1.5 * I;
    expect.block(n, 0, n, n) = -1.5 * I;
    expect.block(n, n, n, n) = 1.5 * I;
    CHECK((c - expect).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("coupling equals k S^T S with S = [-I, I, gamma R]") {
    BeamParams p;
    p.k = 0.7;
    p.gamma = 1.3;
    BeamParams p0 = p;
    p0.k = 0.0;
    const DiscreteOperators ops = build_operators(g, p);
    const Eigen::MatrixXd c = dense(ops.k_stiff.to_dense(), N) - dense(build_operators(g, p0).k_stiff.to_dense(), N);
    Eigen::MatrixXd s(n, N);
    s << -Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(n, n), 1.3 * dense(ops.r_factor.to_dense(), n);
    const Eigen::MatrixXd expect = 0.7 * s.transpose() * s;
    CHECK((c - expect).cwiseAbs().maxCoeff() < 1e-9 * expect.cwiseAbs().maxCoeff());
  }

  SECTION("symmetric and positive on random vectors") {
    const DiscreteOperators ops = build_operators(g, BeamParams{});
    const Eigen::MatrixXd k = dense(ops.k_stiff.to_dense(), N);
    CHECK(k == k.transpose());
    std::mt19937 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_vector(N, rng);
      CHECK(ops.k_stiff.quadratic_form(x) > 0.0);
    }
  }

  SECTION("bandwidth") {
    const DiscreteOperators ops = build_operators(SpatialGrid(30, 1.0), BeamParams{});
    CHECK(ops.k_stiff.interleaved().half_bandwidth() == 6);
    CHECK(ops.k_stiff.block_bandwidth() <= 2 * 30 + 2);
  }
}

TEST_CASE("block operator and effective system round trips") {
  const DiscreteOperators ops = build_operators(SpatialGrid(20, 1.0), BeamParams{});
  const std::size_t N = ops.dofs();
  std::mt19937 rng(9);
  const auto x = random_vector(N, rng);
  const Eigen::MatrixXd k = dense(ops.k_stiff.to_dense(), N);
  const Eigen::VectorXd kx = k * Eigen::Map<const Eigen::VectorXd>(x.data(), N);
  const auto y = ops.k_stiff.matvec(x);
  for (std::size_t i = 0; i < N; ++i) CHECK(y[i] == Approx(kx(i)).epsilon(1e-12).margin(1e-6));

  const EffectiveSystem eff(ops.k_stiff, 1.3, 1e-4);
  std::vector<double> ax(N);
  for (std::size_t i = 0; i < N; ++i) ax[i] = 1.3 * x[i] + 1e-4 * y[i];
  const auto back = eff.solve(ax);
  for (std::size_t i = 0; i < N; ++i) CHECK(back[i] == Approx(x[i]).margin(1e-10));
  std::vector<extended> axe(ax.begin(), ax.end());
  const auto back_e = eff.solve_extended(axe);
  for (std::size_t i = 0; i < N; ++i) CHECK(static_cast<double>(back_e[i]) == Approx(x[i]).margin(1e-12));

  const DofLayout lay{20};
  for (std::size_t i = 0; i < N; ++i) CHECK(lay.block(lay.interleaved(i)) == i);
}

TEST_CASE("shear vector") {
  const DiscreteOperators ops = build_operators(SpatialGrid(10, 1.0), BeamParams{});
  std::vector<double> u(30, 0.0);
  for (std::size_t j = 0; j < 10; ++j) u[j] = u[10 + j] = std::sin(0.4 * static_cast<double>(j));
  for (double s : shear_vector(u, ops)) CHECK(s == 0.0);

  BeamParams p;
  p.gamma = 0.0;
  const DiscreteOperators ops0 = build_operators(SpatialGrid(10, 1.0), p);
  std::mt19937 rng(1);
  const auto x = random_vector(30, rng);
  const auto s0 = shear_vector(x, ops0);
  for (std::size_t j = 0; j < 10; ++j) CHECK(s0[j] == x[10 + j] - x[j]);

  BeamParams pk;
  pk.k = 0.0;
  const DiscreteOperators opsk = build_operators(SpatialGrid(10, 1.0), pk);
  const auto s = shear_vector(x, ops);
  double ss = 0.0;
  for (double v : s) ss += v * v;
  const double coupling = ops.k_stiff.quadratic_form(x) - opsk.k_stiff.quadratic_form(x);
  CHECK(coupling == Approx(ss).epsilon(1e-9));
}
