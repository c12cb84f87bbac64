#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ma/rhs.hpp"

using namespace ma;

TEST_CASE("eval_rhs values and closed-form partials") {
  CoupledRHS lin = make_rhs("linear");
  RhsEval e = eval_rhs(lin, Which::G, 0.5, 0.5, 0.0, 0.0);
  REQUIRE(e.value == -1.0);
  REQUIRE(e.partials.du == -1.0);
  REQUIRE(e.partials.dv == 1.0);
  REQUIRE(e.partials.dp1 == 0.0);
  REQUIRE(e.partials.dp2 == 0.0);

  CoupledRHS expr = make_rhs("exp");
  RhsEval f = eval_rhs(expr, Which::F, 0.0, 0.0, 0.0, 0.0);
  REQUIRE(f.value == -1.0);
  REQUIRE(f.partials.du == 1.0);
  REQUIRE(f.partials.dv == 0.0);
}

TEST_CASE("closed-form partials agree with the finite-difference oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (const char* name :
       {"linear", "exp", "negexp", "decoupled", "coupled-linear", "coupled-exp"}) {
    CoupledRHS closed = make_rhs(name);
    CoupledRHS fd = make_rhs(name);
    fd.g_partials = nullptr;
    fd.f_partials = nullptr;
    for (int i = 0; i < 1000; ++i) {
      double u = d(rng), v = d(rng), p1 = d(rng), p2 = d(rng);
      for (Which w : {Which::G, Which::F}) {
        Partials a = eval_rhs(closed, w, u, v, p1, p2).partials;
        Partials b = eval_rhs(fd, w, u, v, p1, p2).partials;
        double scale = 1.0 + std::abs(a.du) + std::abs(a.dv) + std::abs(a.dp1) +
                       std::abs(a.dp2);
        REQUIRE(std::abs(a.du - b.du) <= 1e-6 * scale);
        REQUIRE(std::abs(a.dv - b.dv) <= 1e-6 * scale);
        REQUIRE(std::abs(a.dp1 - b.dp1) <= 1e-6 * scale);
        REQUIRE(std::abs(a.dp2 - b.dp2) <= 1e-6 * scale);
      }
    }
  }
}

TEST_CASE("coefficient family partials and values") {
  std::array<double, 5> a{0.5, -1.0, 2.0, 0.25, -0.5};
  CoupledRHS r = make_coefficient_rhs(a);
  double u = 0.3, v = -0.7, p1 = 0.2, p2 = -0.4;
  double expect = 0.5 - 1.0 * u + 2.0 * v + 0.25 * std::exp(-v) - 0.5 * (p1 * p1 + p2 * p2);
  RhsEval e = eval_rhs(r, Which::G, u, v, p1, p2);
  REQUIRE(e.value == Catch::Approx(expect).margin(1e-14));
  REQUIRE(e.partials.dv == Catch::Approx(2.0 - 0.25 * std::exp(-v)).margin(1e-14));
  // f mirrors u and v
  RhsEval f = eval_rhs(r, Which::F, u, v, p1, p2);
  double expect_f = 0.5 - 1.0 * v + 2.0 * u + 0.25 * std::exp(-u) - 0.5 * (p1 * p1 + p2 * p2);
  REQUIRE(f.value == Catch::Approx(expect_f).margin(1e-14));
}

TEST_CASE("non-finite evaluation is detected") {
  CoupledRHS bad;
  bad.name = "bad";
  bad.g_value = bad.f_value = [](double u, double, double, double) {
    return std::log(u);  // -inf or nan for u <= 0
  };
  REQUIRE_THROWS_AS(eval_rhs(bad, Which::G, -1.0, 0, 0, 0), NonFiniteResult);
}

TEST_CASE("p1 symmetry checker verdicts") {
  SampleBox box{-2, 2, -2, 2, -2, 2, -2, 2};

  SECTION("p-independent rhs passes with equality") {
    auto rep = check_p1_symmetry(make_rhs("linear"), box, 20000);
    REQUIRE(rep.pass);
    REQUIRE(rep.equality);
  }
  SECTION("even dependence passes with equality") {
    auto rep = check_p1_symmetry(make_rhs("coupled-linear"), box, 20000);
    REQUIRE(rep.pass);
    REQUIRE(rep.equality);
  }
  SECTION("odd p1 term fails with a valid witness") {
    CoupledRHS odd = make_rhs("exp");
    odd.g_value = [](double, double v, double p1, double) {
      return -std::exp(-v) + p1 * std::abs(p1);
    };
    auto rep = check_p1_symmetry(odd, box, 20000);
    REQUIRE_FALSE(rep.pass);
    REQUIRE_FALSE(rep.equality);
    REQUIRE(rep.worst_margin < 0.0);
    // replay the witness
    auto [u, v, p1, p2] = rep.witness;
    REQUIRE(p1 < 0.0);
    double margin = odd.g_value(u, v, p1, p2) - odd.g_value(u, v, -p1, p2);
    REQUIRE(margin < 0.0);
  }
  SECTION("strictly favorable odd term passes without equality") {
    CoupledRHS fav = make_rhs("exp");
    fav.g_value = [](double, double v, double p1, double) {
      return -std::exp(-v) - p1 * std::abs(p1);  // -p1|p1| >= +p1|p1| for p1<0
    };
    auto rep = check_p1_symmetry(fav, box, 20000);
    REQUIRE(rep.pass);
    REQUIRE_FALSE(rep.equality);
  }
}

TEST_CASE("p1 symmetry verdict is invariant under negating the p2 range") {
  SampleBox box{-1, 1, -1, 1, -2, 2, 0.25, 1.75};
  SampleBox neg = box;
  neg.p2_min = -box.p2_max;
  neg.p2_max = -box.p2_min;
  for (const char* name : {"linear", "exp", "coupled-exp", "negexp"}) {
    auto a = check_p1_symmetry(make_rhs(name), box, 5000);
    auto b = check_p1_symmetry(make_rhs(name), neg, 5000);
    REQUIRE(a.pass == b.pass);
    REQUIRE(a.equality == b.equality);
  }
}

TEST_CASE("cross monotonicity checker verdicts") {
  SampleBox box{-2, 2, -2, 2, -2, 2, -2, 2};

  SECTION("linear coupling: unit partials") {
    auto rep = check_cross_monotonicity(make_rhs("linear"), box, 20000);
    REQUIRE(rep.pass);
    REQUIRE(rep.g_dv_min == 1.0);
    REQUIRE(rep.g_dv_max == 1.0);
    REQUIRE(rep.f_du_min == 1.0);
    REQUIRE(rep.f_du_max == 1.0);
  }
  SECTION("exp pair passes strictly") {
    auto rep = check_cross_monotonicity(make_rhs("exp"), box, 20000);
    REQUIRE(rep.pass);
    REQUIRE(rep.g_dv_min > 0.0);
    REQUIRE(rep.g_dv_max <= std::exp(2.0) + 1e-12);
  }
  SECTION("negexp fails with witness") {
    auto rep = check_cross_monotonicity(make_rhs("negexp"), box, 20000);
    REQUIRE_FALSE(rep.pass);
    auto [u, v, p1, p2] = rep.witness;
    Partials p = eval_rhs(make_rhs("negexp"), rep.witness_fn, u, v, p1, p2).partials;
    if (rep.witness_fn == Which::G)
      REQUIRE(p.dv <= 0.0);
    else
      REQUIRE(p.du <= 0.0);
  }
}

TEST_CASE("checker verdicts are deterministic under a fixed seed") {
  SampleBox box{-2, 2, -2, 2, -2, 2, -2, 2};
  auto a = check_p1_symmetry(make_rhs("negexp"), box, 10000, 777);
  auto b = check_p1_symmetry(make_rhs("negexp"), box, 10000, 777);
  REQUIRE(a.pass == b.pass);
  REQUIRE(a.worst_margin == b.worst_margin);
  REQUIRE(a.witness == b.witness);
  auto c = check_cross_monotonicity(make_rhs("negexp"), box, 10000, 777);
  auto d = check_cross_monotonicity(make_rhs("negexp"), box, 10000, 777);
  REQUIRE(c.witness == d.witness);
  REQUIRE(c.g_dv_min == d.g_dv_min);
}
