#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "invdoe/inverse_regressor.hpp"
#include "invdoe/problem_suite.hpp"

using namespace invdoe;
using namespace invdoe::inverse;

namespace {

struct Data {
  problems::ConstraintSpec constraints;
  std::vector<Vector> xs, ys;
};

Data quadratic_pairs(std::size_t n) {
  const auto p = problems::make_problem("constrained-biobj");
  Data d{p.constraints, p.constraints.sample_feasible(n, 3), {}};
  for (const auto& x : d.xs) d.ys.push_back(p.evaluate(x).y);
  return d;
}

}  // namespace

TEST_SUITE("inverse_regressor") {

TEST_CASE("constraint-aware loss by hand") {
  problems::ConstraintSpec c({0, 0}, {1, 1});
  c.add_less_equal({1, 1}, 1.0);
  const auto r = caft_loss(Vector{0.8, 0.6}, Vector{0.5, 0.5}, c, 2.0);
  CHECK(r.mse_term == doctest::Approx((0.09 + 0.01) / 2));
  CHECK(r.penalty_term == doctest::Approx(0.4 * 0.4));
  CHECK(r.total == doctest::Approx(r.mse_term + 2.0 * r.penalty_term));
  const auto ok = caft_loss(Vector{0.2, 0.2}, Vector{0.2, 0.2}, c, 5.0);
  CHECK(ok.total == 0.0);
  CHECK_THROWS_AS(caft_loss(Vector{0.2}, Vector{0.2, 0.2}, c, 1.0), DimensionError);
}

TEST_CASE("equalities enter the penalty outside their tolerance") {
  problems::ConstraintSpec c({0, 0}, {1, 1});
  c.add_equal({1, 1}, 1.0, 0.1);
  CHECK(caft_loss(Vector{0.5, 0.55}, Vector{0.5, 0.5}, c, 1.0).penalty_term == 0.0);
  CHECK(caft_loss(Vector{0.5, 0.8}, Vector{0.5, 0.5}, c, 1.0).penalty_term ==
        doctest::Approx(0.2 * 0.2));
}

TEST_CASE("training is deterministic and predictions stay in the box") {
  const auto d = quadratic_pairs(120);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.hidden = {16};
  const auto a = train(d.xs, d.ys, d.constraints, cfg, 5);
  const auto b = train(d.xs, d.ys, d.constraints, cfg, 5);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.widths() == std::vector<std::size_t>{2, 16, 2});
  CHECK(a.curve().size() <= 40);
  for (const Vector& y : {Vector{0.0, 0.0}, Vector{100.0, -50.0}, Vector{0.3, 0.4}}) {
    const Vector x = a.predict(y);
    CHECK(d.constraints.in_box(x));
    for (double u : a.predict_unit(y)) {
      CHECK(u >= 0.0);
      CHECK(u <= 1.0);
    }
  }
}

TEST_CASE("training reduces validation loss") {
  const auto d = quadratic_pairs(300);
  TrainConfig cfg;
  cfg.epochs = 150;
  const auto m = train(d.xs, d.ys, d.constraints, cfg, 1);
  CHECK(m.curve()[m.best_epoch()].validation_loss < m.curve().front().validation_loss);
}

TEST_CASE("json round trip") {
  const auto d = quadratic_pairs(60);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.activation = Activation::Relu;
  const auto m = train(d.xs, d.ys, d.constraints, cfg, 2);
  const auto back = RegressorModel::from_json(m.to_json());
  CHECK(back.predict(Vector{0.3, 0.3}) == m.predict(Vector{0.3, 0.3}));
  CHECK(back.activation() == Activation::Relu);
  CHECK(back.to_json() == m.to_json());
}

TEST_CASE("bad inputs") {
  const auto d = quadratic_pairs(20);
  CHECK_THROWS(train({}, {}, d.constraints, TrainConfig{}, 0));
  auto ys = d.ys;
  ys.pop_back();
  CHECK_THROWS(train(d.xs, ys, d.constraints, TrainConfig{}, 0));
  CHECK(activation_from_string("relu") == Activation::Relu);
  CHECK_THROWS(activation_from_string("sigmoid"));
}

TEST_CASE("training curve csv") {
  const auto d = quadratic_pairs(40);
  TrainConfig cfg;
  cfg.epochs = 5;
  const auto m = train(d.xs, d.ys, d.constraints, cfg, 0);
  const auto path = std::filesystem::temp_directory_path() / "invdoe_curve.csv";
  write_training_curve_csv(path, m.curve());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,train,val,violation_rate");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == m.curve().size());
  std::filesystem::remove(path);
}

}
