#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nlstefan/graph.hpp"

using namespace nlstefan;

TEST_CASE("canonical temperature point values") {
  CHECK(nlstefan::gamma(0.0) == 0.0);
  CHECK(nlstefan::gamma(0.5) == 0.0);
  CHECK(nlstefan::gamma(-0.5) == 0.0);
  CHECK(nlstefan::gamma(1.0) == 0.0);
  CHECK(nlstefan::gamma(-1.0) == 0.0);
  CHECK(nlstefan::gamma(2.5) == 1.5);
  CHECK(nlstefan::gamma(-2.5) == -1.5);
  CHECK(nlstefan::gamma(1.0 + 1e-9) == (1.0 + 1e-9) - 1.0);
}

TEST_CASE("canonical temperature is monotone and 1-Lipschitz") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> d(-6.0, 6.0);
  for (int i = 0; i < 3000; ++i) {
    double a = d(rng), b = d(rng);
    if (a > b) std::swap(a, b);
    double ga = nlstefan::gamma(a), gb = nlstefan::gamma(b);
    CHECK(ga <= gb);
    CHECK(gb - ga <= (b - a) + 1e-15);
  }
}

TEST_CASE("one-phase branch agrees with the canonical graph on nonnegative input") {
  for (double s : {0.0, 0.3, 1.0, 1.7, 4.0}) CHECK(gamma_one_phase(s) == nlstefan::gamma(s));
  CHECK(gamma_one_phase(-3.0) == 0.0);
}

TEST_CASE("regularized graph properties") {
  // (i) odd, (ii) nondecreasing and 1/(n+1)-to-1 Lipschitz, (iii) within
  // 1/(n+1) of the canonical graph, (iv) continuous where the branches meet.
  for (int n : {1, 2, 5, 50}) {
    double thr = (n + 1.0) / n;
    std::mt19937 rng(400 + n);
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    for (int i = 0; i < 2000; ++i) {
      double s = d(rng);
      CHECK(gamma_n(-s, n) == -gamma_n(s, n));
      CHECK(std::fabs(gamma_n(s, n) - nlstefan::gamma(s)) <= 1.0 / (n + 1.0) + 1e-15);
      double t = d(rng);
      if (s > t) std::swap(s, t);
      double gs = gamma_n(s, n), gt = gamma_n(t, n);
      CHECK(gs <= gt + 1e-15);
      CHECK(gt - gs <= (t - s) + 1e-12);
    }
    // Branch meeting points: both formulas give 1/n at s = (n+1)/n.
    CHECK(gamma_n(thr, n) == Catch::Approx(1.0 / n).epsilon(1e-12));
    CHECK(gamma_n(thr - 1e-12, n) == Catch::Approx(1.0 / n).epsilon(1e-6));
    CHECK(gamma_n(thr + 1e-12, n) == Catch::Approx(1.0 / n).epsilon(1e-6));
    // Slope inside the mushy band is 1/(n+1).
    CHECK(gamma_n(0.5, n) == Catch::Approx(0.5 / (n + 1.0)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(gamma_n(0.0, 0), std::invalid_argument);
}

TEST_CASE("general graph reduces to canonical for unit parameters") {
  GraphParams p;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-6.0, 6.0);
  for (int i = 0; i < 1000; ++i) {
    double s = d(rng);
    CHECK(gamma_general(s, p) == nlstefan::gamma(s));
  }
}

TEST_CASE("general graph point values for asymmetric parameters") {
  GraphParams p{-2.0, 0.5, 3.0, 0.25};
  p.validate();
  CHECK(gamma_general(-1.0, p) == 0.0);
  CHECK(gamma_general(0.25, p) == 0.0);
  CHECK(gamma_general(-2.0, p) == 0.0);
  CHECK(gamma_general(0.5, p) == 0.0);
  // Below e1 the slope is c1: gamma = c1 (u - e1).
  CHECK(gamma_general(-3.0, p) == Catch::Approx(-3.0).epsilon(1e-14));
  // Above e2 the slope is c2: gamma = c2 (u - e2).
  CHECK(gamma_general(2.5, p) == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("graph parameter validation") {
  GraphParams p;
  p.e1 = 0.5;
  CHECK_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("straddle"));
  p = GraphParams{};
  p.c2 = 0.0;
  CHECK_THROWS_WITH(p.validate(), Catch::Matchers::ContainsSubstring("positive"));
  p = GraphParams{};
  CHECK_NOTHROW(normalize_units(p));
}

TEST_CASE("unit change maps the general problem onto the canonical one") {
  GraphParams p{-0.5, 2.0, 2.0, 0.5};
  UnitChange uc{p};
  std::mt19937 rng(88);
  std::uniform_real_distribution<double> d(-8.0, 8.0);
  for (int i = 0; i < 2000; ++i) {
    double u = d(rng);
    double s = uc.to_canonical(u);
    CHECK(uc.from_canonical(s) == Catch::Approx(u).epsilon(0).margin(1e-12));
    CHECK(gamma_general(u, p) ==
          Catch::Approx(uc.temperature_scale(s) * nlstefan::gamma(s)).epsilon(0).margin(1e-12));
  }
  // Endpoint images: e1 -> -1, e2 -> 1.
  CHECK(uc.to_canonical(-0.5) == -1.0);
  CHECK(uc.to_canonical(2.0) == 1.0);
}

TEST_CASE("graph spec dispatch") {
  GraphSpec c = GraphSpec::canonical();
  GraphSpec o = GraphSpec::one_phase();
  GraphSpec r = GraphSpec::regularized(5);
  GraphParams p{-2.0, 0.5, 3.0, 0.25};
  GraphSpec g = GraphSpec::general(p);
  CHECK(c(2.0) == 1.0);
  CHECK(o(-2.0) == 0.0);
  CHECK(r(0.6) == gamma_n(0.6, 5));
  CHECK(g(2.5) == gamma_general(2.5, p));

  GraphSpec bad = GraphSpec::regularized(0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("field-level graph application") {
  Grid grid = Grid::make_1d(5, 1.0, -2.0);
  Field f(grid, {-3.0, -0.5, 0.0, 1.5, 2.0});
  Field v = apply_graph(f, GraphSpec::canonical());
  CHECK(v[0] == -2.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 0.0);
  CHECK(v[3] == 0.5);
  CHECK(v[4] == 1.0);
}
