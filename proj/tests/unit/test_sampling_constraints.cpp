#include <cmath>

#include "doctest.h"
#include "invdoe/constraints.hpp"
#include "invdoe/sampling.hpp"
#include "oracles.hpp"

using namespace invdoe;
using invdoe::problems::ConstraintSpec;

TEST_SUITE("sampling") {

TEST_CASE("quasi-random points lie in the unit cube and are seeded") {
  sampling::QuasiRandom a(3, 7), b(3, 7), c(3, 8);
  bool differs = false;
  for (int i = 0; i < 256; ++i) {
    const Vector p = a.next();
    CHECK(p == b.next());
    if (p != c.next()) differs = true;
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
  }
  CHECK(differs);
}

TEST_CASE("quasi-random marginals are even") {
  sampling::QuasiRandom q(2, 1);
  std::vector<int> bins(8, 0);
  for (int i = 0; i < 1024; ++i) ++bins[static_cast<int>(q.next()[0] * 8)];
  for (int b : bins) CHECK(b == 128);
}

TEST_CASE("standard normals") {
  const Vector z = sampling::standard_normals(20000, 3);
  CHECK(z == sampling::standard_normals(20000, 3));
  double mean = 0, sq = 0;
  for (double v : z) {
    mean += v;
    sq += v * v;
  }
  mean /= z.size();
  CHECK(std::abs(mean) < 0.03);
  CHECK(sq / z.size() == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("normal pdf and cdf") {
  for (double z : {-3.0, -0.5, 0.0, 1.2, 4.0}) {
    CHECK(sampling::normal_pdf(z) == doctest::Approx(oracle::phi(z)));
    CHECK(sampling::normal_cdf(z) == doctest::Approx(oracle::Phi(z)));
  }
}

}

TEST_SUITE("constraints") {

ConstraintSpec triangle() {
  ConstraintSpec c({0, 0}, {1, 1});
  c.add_less_equal({1, 1}, 1.0, "sum");
  return c;
}

TEST_CASE("feasibility and violations") {
  const auto c = triangle();
  CHECK(c.is_feasible(Vector{0.2, 0.3}));
  CHECK_FALSE(c.is_feasible(Vector{0.8, 0.8}));
  CHECK_FALSE(c.is_feasible(Vector{-0.1, 0.3}));
  CHECK(c.violations(Vector{0.8, 0.8})[0] == doctest::Approx(0.6));
  CHECK(c.max_violation(Vector{0.2, 0.2}) <= 0.0);
}

TEST_CASE("greater-equal is stored negated") {
  ConstraintSpec c({0, 0}, {1, 1});
  c.add_greater_equal({1, 0}, 0.25);
  CHECK(c.linear()[0].coeffs == Vector{-1, 0});
  CHECK(c.linear()[0].bound == -0.25);
  CHECK_FALSE(c.is_feasible(Vector{0.1, 0.5}));
}

TEST_CASE("equality with tolerance") {
  ConstraintSpec c({0, 0, 0}, {1, 1, 1});
  c.add_equal({1, 1, 1}, 1.0, 1e-6);
  CHECK(c.has_equalities());
  CHECK(c.is_feasible(Vector{0.2, 0.3, 0.5}));
  CHECK_FALSE(c.is_feasible(Vector{0.2, 0.3, 0.6}));
  const Vector p = c.project(Vector{0.5, 0.5, 0.5});
  CHECK(c.is_feasible(p));
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("projection") {
  const auto c = triangle();
  const Vector inside{0.1, 0.2};
  CHECK(c.project(inside) == inside);
  const Vector p = c.project(Vector{1.0, 1.0});
  CHECK(c.is_feasible(p));
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-4));
  const Vector q = c.project(Vector{2.0, -1.0});
  CHECK(c.is_feasible(q));
  CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("unit-cube mapping") {
  ConstraintSpec c({-1, 10}, {1, 20});
  const Vector u = c.to_unit(Vector{0, 15});
  CHECK(u == Vector{0.5, 0.5});
  CHECK(c.from_unit(Vector{1.2, 0.0}) == Vector{1, 10});
  const auto n = triangle().normalized();
  CHECK(n.lower() == Vector{0, 0});
  CHECK(n.is_feasible(Vector{0.4, 0.4}));
}

TEST_CASE("feasible sampling") {
  const auto c = triangle();
  const auto pts = c.sample_feasible(100, 4);
  CHECK(pts.size() == 100);
  for (const auto& p : pts) CHECK(c.is_feasible(p));
  CHECK(pts == c.sample_feasible(100, 4));
  CHECK(pts != c.sample_feasible(100, 5));
}

TEST_CASE("feasible sampling on a simplex") {
  ConstraintSpec c({0, 0, 0, 0}, {1, 1, 1, 1});
  c.add_equal({1, 1, 1, 1}, 1.0);
  for (const auto& p : c.sample_feasible(50, 1)) CHECK(c.is_feasible(p));
}

TEST_CASE("infeasible region") {
  ConstraintSpec c({0, 0}, {1, 1});
  c.add_greater_equal({1, 1}, 3.0);
  CHECK_THROWS_WITH_AS(c.sample_feasible(3, 0, 50), "infeasible search region",
                       InfeasibleRegionError);
}

TEST_CASE("validation") {
  CHECK_THROWS(ConstraintSpec({1, 0}, {0, 1}).validate());
  auto c = triangle();
  c.set_witness({0.9, 0.9});
  CHECK_THROWS(c.validate());
  CHECK(ConstraintSpec({0, 0}, {1, 1}).names() == std::vector<std::string>{"x1", "x2"});
}

}
