#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ma/geometry.hpp"
#include "ma/grid.hpp"

using namespace ma;

namespace {

// nonconvex-in-x1 test domain: unit disk with a bite taken out on the right
Domain2D make_crescent() {
  Domain2D d;
  d.name = "crescent";
  d.inside = [](Point p) {
    double r2 = p.x1 * p.x1 + p.x2 * p.x2;
    double b2 = (p.x1 - 0.55) * (p.x1 - 0.55) + p.x2 * p.x2;
    return r2 < 1.0 && b2 > 0.16;
  };
  d.boundary_distance = [](Point p) {
    double outer = std::hypot(p.x1, p.x2) - 1.0;
    double bite = 0.4 - std::hypot(p.x1 - 0.55, p.x2);
    return std::max(outer, bite);
  };
  d.bbox = {-1.0, 1.0, -1.0, 1.0};
  return d;
}

// independent oracle: dense sampling of inf x1 over the bounding box
double dense_inf_x1(const Domain2D& dom, int n) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ux(dom.bbox.x1_min, dom.bbox.x1_max);
  std::uniform_real_distribution<double> uy(dom.bbox.x2_min, dom.bbox.x2_max);
  double inf = 0.0;
  for (int i = 0; i < n; ++i) {
    Point p{ux(rng), uy(rng)};
    if (dom.inside(p)) inf = std::min(inf, p.x1);
  }
  return inf;
}

}  // namespace

TEST_CASE("half_width_a of the builtin domains") {
  REQUIRE(half_width_a(make_disk()) == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(half_width_a(make_ellipse()) == Catch::Approx(2.0).margin(1e-10));
  REQUIRE(half_width_a(make_rect()) == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(half_width_a(make_stadium()) == Catch::Approx(1.1).margin(1e-10));
}

TEST_CASE("egg half-width matches the dense-sampling oracle") {
  Domain2D egg = make_egg();
  double a = half_width_a(egg);
  REQUIRE(a == Catch::Approx(0.8).margin(1e-10));
  double oracle = dense_inf_x1(egg, 1000000);
  REQUIRE(-oracle <= a + 1e-10);       // sampling can never beat the true inf
  REQUIRE(-oracle >= a - 5e-3);        // but gets close with 1e6 points
}

TEST_CASE("half_width_a agrees with the mirrored domain for symmetric builtins") {
  for (auto maker : {make_disk, make_ellipse, make_rect, make_stadium}) {
    Domain2D d = maker();
    Domain2D mirrored = d;
    auto inside = d.inside;
    mirrored.inside = [inside](Point p) { return inside({-p.x1, p.x2}); };
    mirrored.bbox = {-d.bbox.x1_max, -d.bbox.x1_min, d.bbox.x2_min, d.bbox.x2_max};
    REQUIRE(half_width_a(d) == Catch::Approx(half_width_a(mirrored)).margin(1e-8));
  }
}

TEST_CASE("reflect formula, fixed plane, involution") {
  Point p = reflect({-0.3, 0.2}, -0.1);
  REQUIRE(p.x1 == Catch::Approx(0.1).margin(1e-15));
  REQUIRE(p.x2 == 0.2);

  Point on_plane = reflect({-0.25, 0.7}, -0.25);
  REQUIRE(on_plane.x1 == -0.25);

  // exact involution for lattice-representable coordinates
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(-128, 128);
  for (int i = 0; i < 1000; ++i) {
    Point q{d(rng) / 64.0, d(rng) / 64.0};
    double lam = d(rng) / 64.0;
    Point back = reflect(reflect(q, lam), lam);
    REQUIRE(back.x1 == q.x1);
    REQUIRE(back.x2 == q.x2);
  }
  // and within rounding for arbitrary doubles
  std::uniform_real_distribution<double> dr(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    Point q{dr(rng), dr(rng)};
    double lam = dr(rng);
    Point back = reflect(reflect(q, lam), lam);
    REQUIRE(back.x1 == Catch::Approx(q.x1).margin(1e-14));
    REQUIRE(back.x2 == q.x2);
  }
}

TEST_CASE("cap_region basics on the disk") {
  Domain2D disk = make_disk();
  double h = 1.0 / 64;
  UniformGrid grid(disk, h);
  double a = grid.half_width();
  REQUIRE(a == Catch::Approx(1.0).margin(1e-9));

  SECTION("half-spacing sliver is empty when a sits on the node lattice") {
    // a = 1 = 64 h here, so no interior node lies left of -a + h/2
    CapRegion cap = cap_region(disk, grid, -a + h / 2);
    REQUIRE(cap.node_indices.empty());
  }
  SECTION("thin sliver near the left edge of the egg") {
    Domain2D egg = make_egg();
    UniformGrid egrid(egg, h);  // a = 0.8 is off-lattice: the sliver is real
    double ea = egrid.half_width();
    CapRegion cap = cap_region(egg, egrid, -ea + h / 2);
    REQUIRE_FALSE(cap.node_indices.empty());
    for (int k : cap.node_indices) {
      Point p = egrid.coord(k);
      REQUIRE(p.x1 < -ea + h / 2);
      REQUIRE(egg.inside(p));
      REQUIRE(p.x1 >= -ea - 1e-12);  // within one spacing of the left boundary
      Point rp = reflect(p, cap.lambda);
      REQUIRE(egg.boundary_distance(rp) <= 1e-9);
    }
  }
  SECTION("lambda = -a gives the empty region") {
    CapRegion cap = cap_region(disk, grid, -a);
    REQUIRE(cap.node_indices.empty());
  }
  SECTION("lambda = 0 gives the left half") {
    CapRegion cap = cap_region(disk, grid, 0.0);
    std::size_t left = 0;
    for (int k : grid.active_nodes())
      if (grid.coord(k).x1 < -1e-12) ++left;
    REQUIRE(cap.node_indices.size() == left);
  }
  SECTION("out-of-range lambda is rejected") {
    REQUIRE_THROWS_AS(cap_region(disk, grid, -a - 0.1), LambdaOutOfRange);
    REQUIRE_THROWS_AS(cap_region(disk, grid, 0.1), LambdaOutOfRange);
  }
}

TEST_CASE("cap_region is monotone in lambda") {
  Domain2D egg = make_egg();
  UniformGrid grid(egg, 1.0 / 32);
  double a = grid.half_width();
  std::vector<double> lambdas;
  for (int i = 1; i <= 12; ++i) lambdas.push_back(-a * (1.0 - i / 12.0));
  std::size_t prev = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    CapRegion cap = cap_region(egg, grid, lambdas[i]);
    REQUIRE(cap.node_indices.size() >= prev);
    prev = cap.node_indices.size();
  }
}

TEST_CASE("half_width_a rejects domains right of the plane") {
  Domain2D shifted = make_disk();
  shifted.name = "shifted";
  shifted.inside = [](Point p) {
    return (p.x1 - 2.0) * (p.x1 - 2.0) + p.x2 * p.x2 < 1.0;
  };
  shifted.bbox = {1.0, 3.0, -1.0, 1.0};
  REQUIRE_THROWS_AS(half_width_a(shifted), NonPositiveA);
  REQUIRE_THROWS_AS(check_reflection_containment(make_disk(), 0), ConfigError);
}

TEST_CASE("reflection containment verdicts") {
  REQUIRE(check_reflection_containment(make_disk(), 2000).pass);
  REQUIRE(check_reflection_containment(make_egg(), 5000).pass);

  ContainmentReport bad = check_reflection_containment(make_crescent(), 5000);
  REQUIRE_FALSE(bad.pass);
  // the witness really is an interior point whose segment escapes
  Domain2D cres = make_crescent();
  REQUIRE(cres.inside(bad.witness));
  REQUIRE(bad.witness.x1 < 0.0);
  REQUIRE_FALSE(cres.inside({bad.bad_x1, bad.witness.x2}));
  REQUIRE(bad.bad_x1 > bad.witness.x1);
  REQUIRE(bad.bad_x1 < -bad.witness.x1);
}

TEST_CASE("egg is wider on the right at every sampled height") {
  Domain2D egg = make_egg();
  for (int j = 0; j <= 200; ++j) {
    double x2 = -0.79 + 1.58 * j / 200.0;
    double l = detail::row_leftmost(egg, x2, 2048);
    if (!std::isfinite(l) || l >= 0.0) continue;
    // mirrored left endpoint must be (weakly) inside the right part
    for (int s = 1; s <= 50; ++s) {
      double x1 = -l * (1.0 - 1e-9) * s / 50.0;
      REQUIRE(egg.inside({x1, x2}));
    }
  }
}

TEST_CASE("superellipse custom domain") {
  Domain2D se = make_superellipse({0.1, 0.0}, 0.9, 0.5, 4.0, 0.3);
  REQUIRE(se.inside({0.0, 0.0}));
  REQUIRE(check_reflection_containment(se, 2000).pass);
  double a = half_width_a(se);
  REQUIRE(a == Catch::Approx(0.8).margin(1e-8));  // center 0.1 - semi-axis 0.9
  REQUIRE_THROWS_AS(make_superellipse({0, 0}, -1.0, 1.0, 2.0, 0.0), ConfigError);
}
