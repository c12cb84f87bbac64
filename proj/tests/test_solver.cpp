#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ma/solver.hpp"

using namespace ma;

namespace {

double solve_error(const SolveResult& res, const ManufacturedCase& mc) {
  const UniformGrid& g = *res.u.grid;
  double e = 0.0;
  for (int k : g.active_nodes())
    e = std::max(e, std::abs(res.u.values[k] - mc.exact_u(g.coord(k))));
  return e;
}

// smooth bump supported inside the disk, zero trace
double bump(Point p) {
  double r2 = p.x1 * p.x1 + p.x2 * p.x2;
  if (r2 >= 0.64) return 0.0;
  double t = 1.0 - r2 / 0.64;
  return t * t * t;
}

}  // namespace

TEST_CASE("residual vanishes on exact quadratic instances") {
  UniformGrid g(make_disk(), 1.0 / 32);
  auto quad = [](Point p) { return 0.5 * (p.x1 * p.x1 + p.x2 * p.x2); };
  ScalarField u = ScalarField::from_function(g, quad);
  ScalarField v = u;

  // 1e-12 at interior nodes; shortened arms amplify rounding near the
  // boundary, so those rows only get 1e-9
  SECTION("decoupled constant rhs") {
    auto [ru, rv] = residual(u, v, make_rhs("constant"));
    for (int k : g.active_nodes()) {
      double tol = g.node_class(k) == NodeClass::INTERIOR ? 1e-12 : 1e-9;
      REQUIRE(std::abs(ru.values[k]) <= tol);
      REQUIRE(std::abs(rv.values[k]) <= tol);
    }
  }
  SECTION("linear coupling cancels on u = v") {
    auto [ru, rv] = residual(u, v, make_rhs("linear"));
    for (int k : g.active_nodes()) {
      double tol = g.node_class(k) == NodeClass::INTERIOR ? 1e-12 : 1e-9;
      REQUIRE(std::abs(ru.values[k]) <= tol);
      REQUIRE(std::abs(rv.values[k]) <= tol);
    }
  }
}

TEST_CASE("manufactured exact solution has O(h^2) residual in the interior") {
  for (const char* name :
       {"radial-decoupled", "radial-coupled-linear", "radial-coupled-exp"}) {
    ManufacturedCase mc = manufactured_case(name);
    double deep[2], overall[2];
    double hs[2] = {1.0 / 16, 1.0 / 32};
    for (int m = 0; m < 2; ++m) {
      UniformGrid g(mc.domain, hs[m]);
      ScalarField u = ScalarField::from_function(g, mc.exact_u);
      ScalarField v = ScalarField::from_function(g, mc.exact_v);
      auto [ru, rv] = residual(u, v, mc.rhs);
      overall[m] = std::max(max_abs(ru), max_abs(rv));
      double d = 0.0;
      for (int k : g.active_nodes()) {
        if (g.node_class(k) != NodeClass::INTERIOR) continue;
        if (-g.domain().boundary_distance(g.coord(k)) <= 2.0 * g.h()) continue;
        d = std::max({d, std::abs(ru.values[k]), std::abs(rv.values[k])});
      }
      deep[m] = d;
      REQUIRE(d <= 30.0 * hs[m] * hs[m]);
      REQUIRE(overall[m] <= 60.0 * hs[m]);  // near-boundary rows are first order
    }
    INFO(name << ": deep ratio " << deep[0] / deep[1]);
    REQUIRE(deep[0] / deep[1] > 2.5);
    REQUIRE(overall[1] < overall[0]);
  }
}

TEST_CASE("jacobian_apply basics") {
  UniformGrid g(make_disk(), 1.0 / 32);
  ManufacturedCase mc = manufactured_case("radial-coupled-exp");
  ScalarField u = ScalarField::from_function(g, mc.exact_u);
  ScalarField v = ScalarField::from_function(g, mc.exact_v);

  SECTION("zero direction gives zero") {
    ScalarField z(g, [](Point) { return 0.0; });
    for (int k : g.active_nodes()) z.values[k] = 0.0;
    auto [ju, jv] = jacobian_apply(u, v, mc.rhs, z, z);
    REQUIRE(max_abs(ju) == 0.0);
    REQUIRE(max_abs(jv) == 0.0);
  }
  SECTION("constant direction picks up the zeroth-order terms") {
    const double c = 0.75;
    ScalarField d(g, [](Point) { return 0.75; });
    for (int k : g.active_nodes()) d.values[k] = c;
    auto [ju, jv] = jacobian_apply(u, v, mc.rhs, d, d);
    for (int k : g.active_nodes()) {
      Vec2 gu = gradient(u, k);
      Partials gp = eval_rhs(mc.rhs, Which::G, u.values[k], v.values[k], gu.p1, gu.p2).partials;
      REQUIRE(ju.values[k] == Catch::Approx((gp.du + gp.dv) * c).margin(5e-9));
      Vec2 gv = gradient(v, k);
      Partials fp = eval_rhs(mc.rhs, Which::F, u.values[k], v.values[k], gv.p1, gv.p2).partials;
      REQUIRE(jv.values[k] == Catch::Approx((fp.du + fp.dv) * c).margin(5e-9));
    }
  }
}

TEST_CASE("jacobian_apply matches the finite-difference directional derivative") {
  UniformGrid g(make_disk(), 1.0 / 16);
  ManufacturedCase mc = manufactured_case("radial-coupled-linear");
  ScalarField u = ScalarField::from_function(g, mc.exact_u);
  ScalarField v = ScalarField::from_function(g, mc.exact_v);

  ScalarField du(g, [](Point) { return 0.0; });
  ScalarField dv(g, [](Point) { return 0.0; });
  for (int k : g.active_nodes()) {
    Point p = g.coord(k);
    du.values[k] = bump(p);
    dv.values[k] = bump({p.x1 - 0.1, p.x2 + 0.05});
  }

  auto [ju, jv] = jacobian_apply(u, v, mc.rhs, du, dv);

  const double t = 1e-5;
  ScalarField ut = u, vt = v;
  for (int k : g.active_nodes()) {
    ut.values[k] += t * du.values[k];
    vt.values[k] += t * dv.values[k];
  }
  auto [r1u, r1v] = residual(ut, vt, mc.rhs);
  auto [r0u, r0v] = residual(u, v, mc.rhs);

  double num = 0.0, den = 0.0;
  for (int k : g.active_nodes()) {
    double fd_u = (r1u.values[k] - r0u.values[k]) / t;
    double fd_v = (r1v.values[k] - r0v.values[k]) / t;
    num = std::max({num, std::abs(fd_u - ju.values[k]), std::abs(fd_v - jv.values[k])});
    den = std::max({den, std::abs(ju.values[k]), std::abs(jv.values[k])});
  }
  REQUIRE(num <= 1e-4 * (1.0 + den));
}

TEST_CASE("newton_solve reaches the manufactured solution") {
  ManufacturedCase mc = manufactured_case("radial-coupled-linear");
  SolveConfig cfg;

  UniformGrid g16(mc.domain, 1.0 / 16);
  SolveResult r16 = newton_solve(mc.domain, g16, mc.rhs, mc.boundary_u, mc.boundary_v, cfg);
  REQUIRE(r16.converged);
  REQUIRE(r16.final_residual <= cfg.newton_tol);
  REQUIRE(r16.iterations <= 25);

  UniformGrid g32(mc.domain, 1.0 / 32);
  SolveResult r32 = newton_solve(mc.domain, g32, mc.rhs, mc.boundary_u, mc.boundary_v, cfg);

  double e16 = solve_error(r16, mc), e32 = solve_error(r32, mc);
  INFO("e16=" << e16 << " e32=" << e32 << " ratio=" << e16 / e32);
  REQUIRE(e16 / e32 > 3.0);
  REQUIRE(e16 / e32 < 5.6);

  SECTION("residual history decreases strictly after the first accepted step") {
    REQUIRE(r16.residual_history.size() >= 2);
    for (std::size_t i = 1; i < r16.residual_history.size(); ++i)
      REQUIRE(r16.residual_history[i] < r16.residual_history[i - 1]);
  }
  SECTION("discrete convexity holds away from the boundary") {
    REQUIRE(r16.convexity.audited > 0);
    REQUIRE(r16.convexity.violations_u == 0);
    REQUIRE(r16.convexity.violations_v == 0);
  }
  SECTION("boundary monotonicity report") {
    REQUIRE(r16.boundary_monotonicity.pass_u);
    REQUIRE(r16.boundary_monotonicity.pass_v);
    REQUIRE(r16.boundary_monotonicity.rows_checked > 0);
  }
}

TEST_CASE("poisson initialization also converges") {
  ManufacturedCase mc = manufactured_case("radial-decoupled");
  SolveConfig cfg;
  cfg.init = SolveConfig::Init::POISSON;
  UniformGrid g(mc.domain, 1.0 / 16);
  SolveResult r = newton_solve(mc.domain, g, mc.rhs, mc.boundary_u, mc.boundary_v, cfg);
  REQUIRE(r.converged);
  REQUIRE(solve_error(r, mc) < 0.01);
}

TEST_CASE("infeasible instance raises DidNotConverge") {
  // det(D^2 u) = -1 has no convex solution; the damped step collapses
  UniformGrid g(make_disk(), 1.0 / 8);
  CoupledRHS bad = make_rhs("constant");
  bad.g_value = bad.f_value = [](double, double, double, double) { return 1.0; };
  bad.g_partials = bad.f_partials = [](double, double, double, double) {
    return Partials{};
  };
  SolveConfig cfg;
  cfg.pilot_check = false;
  cfg.max_iters = 12;
  auto trace = [](Point) { return 0.5; };
  REQUIRE_THROWS_AS(newton_solve(make_disk(), g, bad, trace, trace, cfg), DidNotConverge);
}

TEST_CASE("convexity audit counts saddle fields") {
  UniformGrid g(make_disk(), 1.0 / 16);
  auto saddle = ScalarField::from_function(
      g, [](Point p) { return 0.5 * (p.x1 * p.x1 - p.x2 * p.x2); });
  auto bowl = ScalarField::from_function(
      g, [](Point p) { return 0.5 * (p.x1 * p.x1 + p.x2 * p.x2); });
  ConvexityReport rep = convexity_audit(saddle, bowl);
  REQUIRE(rep.audited > 0);
  REQUIRE(rep.violations_u == rep.audited);  // saddle everywhere
  REQUIRE(rep.violations_v == 0);
  for (int k : g.active_nodes()) {
    if (g.node_class(k) != NodeClass::INTERIOR) continue;
    REQUIRE(rep.spd_u[k] == 0);
    REQUIRE(rep.spd_v[k] == 1);
  }
}

TEST_CASE("unknown manufactured case name") {
  REQUIRE_THROWS_AS(manufactured_case("radial-cubic"), UnknownCase);
}

TEST_CASE("attained box brackets the known solution ranges") {
  ManufacturedCase mc = manufactured_case("radial-coupled-linear");
  UniformGrid g(mc.domain, 1.0 / 32);
  ScalarField u = ScalarField::from_function(g, mc.exact_u);
  SampleBox box = attained_box(u, u);
  // u = exp(r^2/2) in [1, sqrt(e)], du/dx1 in about [-1.65, 1.65]
  REQUIRE(box.u_min < 1.0);
  REQUIRE(box.u_max > 1.6);
  REQUIRE(box.u_max < 1.9);
  REQUIRE(box.p1_min < -1.4);
  REQUIRE(box.p1_max > 1.4);
  REQUIRE(box.p1_max < 2.0);
}

TEST_CASE("manufactured catalog satisfies the structural hypotheses") {
  SampleBox box{1.0, 1.7, 1.0, 1.7, -1.7, 1.7, -1.7, 1.7};  // attained range
  for (const char* name : {"radial-coupled-linear", "radial-coupled-exp"}) {
    ManufacturedCase mc = manufactured_case(name);
    REQUIRE(check_p1_symmetry(mc.rhs, box, 20000).pass);
    REQUIRE(check_p1_symmetry(mc.rhs, box, 20000).equality);
    REQUIRE(check_cross_monotonicity(mc.rhs, box, 20000).pass);
  }
  // the decoupled case sits on the hypothesis boundary: dg/dv == 0
  ManufacturedCase dec = manufactured_case("radial-decoupled");
  auto rep = check_cross_monotonicity(dec.rhs, box, 2000);
  REQUIRE_FALSE(rep.pass);
  REQUIRE(rep.g_dv_min == 0.0);
  REQUIRE(rep.g_dv_max == 0.0);
}
