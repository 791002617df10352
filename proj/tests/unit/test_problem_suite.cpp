#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "invdoe/problem_suite.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace invdoe;
using namespace invdoe::problems;

TEST_SUITE("problem_suite") {

TEST_CASE("registry") {
  for (const auto& id : registered_problems()) {
    const auto p = make_problem(id);
    CHECK(p.id == id);
    CHECK(p.dim == p.constraints.dim());
    CHECK(p.objective_names.size() == p.n_objectives);
    CHECK(!p.reference_front.empty());
    CHECK(p.reference_point.size() == p.n_objectives);
    for (const auto& f : p.reference_front) CHECK(pareto::weakly_dominates(f, p.reference_point));
  }
  CHECK_THROWS_AS(make_problem("nope"), NotFoundError);
}

TEST_CASE("constrained-biobj evaluation and feasibility") {
  const auto p = make_problem("constrained-biobj");
  const auto e = p.evaluate(Vector{0.5, 0.0});
  CHECK(e.feasible);
  CHECK(e.y == Vector{0.25, 0.25});
  CHECK_FALSE(p.evaluate(Vector{0.0, 0.0}).feasible);
  CHECK_THROWS_AS(p.evaluate(Vector{0.0}), DimensionError);
}

TEST_CASE("analytic fronts are not dominated by brute force samples") {
  for (const char* id : {"biobj-quadratic", "constrained-biobj"}) {
    const auto p = make_problem(id);
    const auto analytic = true_front(p, 200);
    CHECK(analytic.size() == 200);
    CHECK(pareto::pareto_filter(analytic).size() == analytic.size());
    const auto xs = p.constraints.sample_feasible(2000, 1);
    std::vector<Vector> sampled;
    for (const auto& x : xs) sampled.push_back(p.evaluate(x).y);
    // no sample beats the front by more than the discretization gap
    for (const auto& s : sampled) {
      for (const auto& f : analytic) {
        Vector shifted{f[0] - 1e-3, f[1] - 1e-3};
        CHECK_FALSE(oracle::dominates(s, shifted));
      }
    }
  }
}

TEST_CASE("quadratic front endpoints") {
  const auto front = true_front(make_problem("biobj-quadratic"), 3);
  CHECK(front[0] == Vector{0.0, 1.0});
  CHECK(front[1] == Vector{0.25, 0.25});
  CHECK(front[2] == Vector{1.0, 0.0});
  CHECK_THROWS(true_front(make_problem("biobj-quadratic"), 1));
}

TEST_CASE("mixture problem lives on the simplex") {
  const auto p = make_problem("mixture-triobj");
  CHECK(p.constraints.has_equalities());
  const auto e = p.evaluate(Vector{1, 0, 0, 0});
  CHECK(e.y[0] == 0.0);
  CHECK(e.y[1] == doctest::Approx(2.0));
  CHECK(p.n_objectives == 3);
}

TEST_CASE("target-match rewrite") {
  const auto p = with_target(make_problem("biobj-quadratic"), {0.25, 0.25}, 512);
  CHECK(p.mode == Mode::TargetMatch);
  const auto e = p.evaluate(Vector{0.5, 0.0});
  CHECK(e.y[0] == doctest::Approx(0.0));
  CHECK(e.y[1] == doctest::Approx(0.0));
  CHECK(std::all_of(p.senses.begin(), p.senses.end(), [](Sense s) { return s == Sense::Minimize; }));
  CHECK_THROWS(with_target(make_problem("biobj-quadratic"), {0.25}));
  CHECK_THROWS(with_target(make_problem("biobj-quadratic"), {0.25, NAN}));
}

TEST_CASE("dataset parsing") {
  Schema s;
  s.inputs = {"a ", "b"};
  s.outputs = {"y"};
  LoadReport report;
  const auto ds = parse_dataset("a ,b,y,extra\n1,2,3,x\n4,oops,6,x\n7,8,9,x\n1,2,inf,x\n", s, &report);
  CHECK(ds.size() == 2);
  CHECK(report.rows_read == 4);
  CHECK(report.dropped == 2);
  CHECK(ds.x[1] == Vector{7, 8});
  CHECK(ds.y[1] == Vector{9});

  Schema missing = s;
  missing.inputs = {"a", "b"};  // no trailing space
  CHECK_THROWS_WITH_AS(parse_dataset("a ,b,y\n1,2,3\n", missing), "missing column 'a'",
                       NotFoundError);
  CHECK_THROWS(parse_dataset("a ,b,y\nx,y,z\n", s));
}

TEST_CASE("dataset round trip and hash") {
  const auto ds = resin_demo_dataset();
  CHECK(ds.size() == 64);
  CHECK(ds.dim() == 8);
  const auto path = std::filesystem::temp_directory_path() / "invdoe_dataset_test.csv";
  write_dataset_csv(path, ds);
  const auto back = load_dataset(path, resin_demo_schema());
  CHECK(back.x == ds.x);
  CHECK(back.y == ds.y);
  CHECK(dataset_hash(back) == dataset_hash(ds));
  CHECK(dataset_hash(ds).size() == 64);
  auto changed = ds;
  changed.y[0][0] += 1e-9;
  CHECK(dataset_hash(changed) != dataset_hash(ds));
  std::filesystem::remove(path);
}

TEST_CASE("ground truth from data") {
  const auto p = make_problem("resin-demo");
  CHECK(p.dim == 8);
  CHECK(p.objective_names == std::vector<std::string>{"Potlife", "Viscosity", "Adhesion", "Hardness"});
  CHECK(p.senses[0] == Sense::Maximize);
  CHECK(p.senses[1] == Sense::Minimize);
  CHECK(!p.dataset_hash.empty());
  CHECK(p.prior_x.size() == 64);
  // the frozen simulator interpolates its training rows closely
  const auto e = p.evaluate(p.prior_x[3]);
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(e.y[m] == doctest::Approx(p.prior_y[3][m]).epsilon(0.02));
  }
  CHECK(p.evaluate(p.prior_x[3]).y == e.y);
}

TEST_CASE("problem json omits closures") {
  const auto doc = nlohmann::json::parse(problem_to_json(make_problem("constrained-biobj")));
  CHECK(doc["id"] == "constrained-biobj");
  CHECK(doc["linear_constraints"].size() == 1);
  CHECK(doc["dim"] == 2);
}

}
