#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "raonakra/model.hpp"

using namespace raonakra;
using Catch::Approx;

namespace {

bool has_violation(const ValidationReport &r, const std::string &msg) {
  for (const auto &v : r.violations)
    if (v.message == msg) return true;
  return false;
}

}  // namespace

TEST_CASE("reference configuration validates") {
  const ValidationReport r = validate_config(BeamParams{}, FractionalParams(0.5, 0.3), SpatialGrid(100, 1.0),
                                             TimeGrid(0.05, 2000));
  CHECK(r.ok());
}

TEST_CASE("alpha on the boundary is rejected") {
  const ValidationReport r =
      validate_config(BeamParams{}, FractionalParams(1.0, 0.0), SpatialGrid(100, 1.0), TimeGrid(0.05, 10));
  CHECK_FALSE(r.ok());
  CHECK(has_violation(r, "alpha must lie in open interval (0,1)"));
  CHECK(r.violations.front().field == "alpha");
}

TEST_CASE("J = 2 is rejected") {
  const ValidationReport r =
      validate_config(BeamParams{}, FractionalParams(0.5, 0.0), SpatialGrid(2, 1.0), TimeGrid(0.05, 10));
  CHECK(has_violation(r, "J >= 3 required by D4 stencil"));
}

TEST_CASE("several violations are reported together") {
  BeamParams p;
  p.theta = 0.0;
  p.k = -1.0;
  const ValidationReport r = validate_config(p, FractionalParams(0.5, -1.0), SpatialGrid(10, 1.0), TimeGrid(0.0, 0));
  CHECK(r.violations.size() == 5);
  CHECK(r.to_string().find("theta") != std::string::npos);
}

TEST_CASE("c_frak is sin(alpha pi) / pi") {
  CHECK(FractionalParams(0.5, 0.0).c_frak() == Approx(0.3183098861837907).epsilon(1e-15));
  for (double a : {0.01, 0.25, 0.75, 0.99})
    CHECK(FractionalParams(a, 0.0).c_frak() == std::sin(a * std::numbers::pi) / std::numbers::pi);
}

TEST_CASE("grids") {
  const SpatialGrid g(4, 2.0);
  CHECK(g.dx() == 0.5);
  CHECK(g.dx() * 4 == g.ell());
  CHECK(g.node(4) == 2.0);
  const TimeGrid t(0.1, 1000);
  CHECK(t.t_final() == Approx(100.0).epsilon(1e-15));
  CHECK(t.time(10) == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("closed-form initial profiles") {
  CHECK(initial_u(0.5, 1.0) == 0.0625);
  CHECK(initial_w(0.5, 1.0) == 0.0);
  CHECK(initial_u(0.0, 1.0) == 0.0);
  CHECK(initial_u(1.0, 1.0) == 0.0);
  CHECK(initial_w(0.0, 1.0) == 0.0);
  CHECK(initial_w(1.0, 1.0) == 0.0);
  CHECK(initial_u(0.25, 1.0) == Approx(0.25 * (0.125 - 0.015625)).epsilon(1e-15));
  CHECK(initial_w(0.25, 1.0) == Approx(-0.0625 * (0.125 - 0.015625)).epsilon(1e-15));
  CHECK(initial_u(2.0, 4.0) == 16.0);
}

TEST_CASE("initial state sampling") {
  const SpatialGrid g(10, 1.0);
  const BeamState s = build_initial_state(g, BeamParams{});
  REQUIRE(s.dofs() == 30);
  for (std::size_t j = 0; j < 10; ++j) {
    const double x = g.node(j + 1);
    CHECK(s.u_disp[j] == initial_u(x, 1.0));
    CHECK(s.u_disp[10 + j] == 0.0);
    CHECK(s.u_disp[20 + j] == initial_w(x, 1.0));
  }
  CHECK(s.u_disp[4] == 0.0625);  // x_5 = 1/2
  for (double v : s.u_vel) CHECK(v == 0.0);
  for (double a : s.u_acc) CHECK(a == 0.0);

  const BeamState again = build_initial_state(g, BeamParams{});
  CHECK(again.u_disp == s.u_disp);
}
