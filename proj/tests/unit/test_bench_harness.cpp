#include <filesystem>

#include "doctest.h"
#include "invdoe/bench_harness.hpp"
#include "json.hpp"

using namespace invdoe;
using namespace invdoe::bench;
namespace fs = std::filesystem;

namespace {

RunConfig small(Strategy s, std::uint64_t seed = 0) {
  RunConfig c;
  c.problem = "constrained-biobj";
  c.strategy = s;
  c.budget = 16;
  c.init_size = 8;
  c.q = 2;
  c.seed = seed;
  c.n_mc = 128;
  c.starts = 4;
  c.train_size = 100;
  c.epochs = 20;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("invdoe_bench_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("bench_harness") {

TEST_CASE("config validation") {
  RunConfig c = small(Strategy::Qehvi);
  CHECK_NOTHROW(c.validate());
  c.init_size = 20;
  CHECK_THROWS(c.validate());
  c.init_size = 8;
  c.budget = 0;
  CHECK_THROWS(c.validate());
  CHECK(strategy_from_string("inverse-regressor") == Strategy::InverseRegressor);
  CHECK(to_string(Strategy::Random) == "random");
  CHECK_THROWS(strategy_from_string("ax"));
}

TEST_CASE("budget equal to the initial design") {
  RunConfig c = small(Strategy::Qehvi);
  c.budget = c.init_size;
  const auto log = run(c);
  CHECK(log.trials.size() == c.init_size);
  CHECK(log.timings.fit_ms == 0.0);
  CHECK(log.cumulative_hv.size() == 1);
  for (const auto& t : log.trials) CHECK(t.iteration == 0);
}

TEST_CASE("runs honor the budget and cheap constraints") {
  const auto problem = problems::make_problem("constrained-biobj");
  for (Strategy s : {Strategy::Qehvi, Strategy::Baseline, Strategy::Random}) {
    const auto log = run(small(s));
    CHECK(log.trials.size() == 16);
    CHECK(log.evaluator_calls == log.trials.size());
    for (const auto& t : log.trials) CHECK(problem.constraints.is_feasible(t.x));
    for (std::size_t i = 1; i < log.cumulative_hv.size(); ++i) {
      CHECK(log.cumulative_hv[i] >= log.cumulative_hv[i - 1]);
    }
  }
}

TEST_CASE("all BO strategies share the initial design") {
  const auto a = run(small(Strategy::Qehvi, 3));
  const auto b = run(small(Strategy::Baseline, 3));
  const auto c = run(small(Strategy::Random, 3));
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(a.trials[i].x == b.trials[i].x);
    CHECK(a.trials[i].x == c.trials[i].x);
  }
}

TEST_CASE("repeat runs are identical") {
  const auto a = run(small(Strategy::Qehvi, 1));
  const auto b = run(small(Strategy::Qehvi, 1));
  CHECK(same_run(a, b));
  const auto c = run(small(Strategy::Qehvi, 2));
  CHECK_FALSE(same_run(a, c));
}

TEST_CASE("qEHVI grows the hypervolume after initialization") {
  RunConfig c = small(Strategy::Qehvi, 0);
  c.problem = "biobj-quadratic";
  c.budget = 20;
  c.n_mc = 256;
  const auto log = run(c);
  bool grew = false;
  for (std::size_t i = 1; i < log.cumulative_hv.size(); ++i) {
    if (log.cumulative_hv[i] > log.cumulative_hv[i - 1]) grew = true;
  }
  CHECK(grew);
}

TEST_CASE("generative runs use one evaluation per target") {
  const auto c = small(Strategy::InverseRegressor);
  const auto log = run(c);
  CHECK(log.trials.size() == c.budget);
  CHECK(log.evaluator_calls == c.budget);
  CHECK(log.offline_evaluations == c.train_size);
  CHECK(log.timings.training_ms > 0.0);
  const auto problem = problems::make_problem(c.problem);
  CHECK(front_targets(problem, 5).size() == 5);
}

TEST_CASE("evaluate_run") {
  const auto problem = problems::make_problem("constrained-biobj");
  RunLog log;
  log.config = small(Strategy::Random);
  // trials covering the reference front exactly
  const auto ref = problem.reference_front;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    log.trials.push_back({0, problem.constraints.feasible_witness(), ref[i], true, 0.0});
  }
  const auto exact = evaluate_run(log, problem);
  CHECK(*exact.gd == 0.0);
  CHECK(*exact.igd == 0.0);

  RunLog one;
  one.trials.push_back({0, {0.5, 0.0}, {0.25, 0.25}, true, 0.0});
  const auto single = evaluate_run(one, problem);
  CHECK_FALSE(single.spacing.has_value());
  CHECK(*single.max_spread == 0.0);

  RunLog none;
  none.trials.push_back({0, {0.0, 0.0}, {0.0, 1.0}, false, 0.0});
  const auto empty = evaluate_run(none, problem);
  CHECK(empty.pareto_size == 0);
  CHECK_FALSE(empty.has_metrics());
  CHECK(empty.warning.has_value());
  CHECK_THROWS(evaluate_run(RunLog{}, problem));
}

TEST_CASE("persistence and replay") {
  const auto dir = scratch("persist");
  const auto cfg = small(Strategy::Baseline, 4);
  const auto path = dir / (run_stem(cfg) + ".jsonl");
  CHECK(run_stem(cfg) == "constrained-biobj__baseline__seed4");
  RunLog log;
  {
    JsonlRunWriter writer(path);
    log = run(cfg, &writer);
  }
  const auto back = read_run_log(path);
  CHECK(same_run(log, back));
  const auto problem = problems::make_problem(cfg.problem);
  const auto report = evaluate_run(log, problem);
  write_summary(dir / "s.summary.json", log, report);
  const auto stored = read_summary_metrics(dir / "s.summary.json");
  CHECK(pareto::report_details_to_json(stored) ==
        pareto::report_details_to_json(evaluate_run(back, problem)));

  write_run_log(dir / "copy.jsonl", back);
  CHECK(same_run(read_run_log(dir / "copy.jsonl"), log));
  CHECK(config_from_json(config_to_json(cfg)).seed == 4);
  fs::remove_all(dir);
}

TEST_CASE("comparison ordering") {
  auto report = [](std::optional<double> gd, double igd) {
    pareto::MetricsReport r;
    r.gd = gd;
    r.igd = igd;
    r.hv = 1.0;
    r.max_spread = 0.0;
    r.pareto_size = 3;
    return r;
  };
  const auto table = compare({{"ax", "p", 0, report(15.03, 1.0)},
                              {"qehvi", "p", 0, report(0.0, 1.0)},
                              {"llm", "p", 0, report(1.21, 1.0)}});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].strategy == "qehvi");
  CHECK(table.rows[1].strategy == "llm");
  CHECK(table.rows[2].strategy == "ax");
  CHECK(table.rows[2].rank == 3);

  const auto tie = compare({{"a", "p", 0, report(1.0, 2.0)}, {"b", "p", 0, report(1.0, 1.0)}});
  CHECK(tie.rows[0].strategy == "b");
  const auto undefined = compare({{"a", "p", 0, pareto::MetricsReport{}}, {"b", "p", 0, report(9.0, 9.0)}});
  CHECK(undefined.rows[0].strategy == "b");
  CHECK(compare({{"solo", "p", 0, report(1.0, 1.0)}}).rows[0].rank == 1);
  CHECK_THROWS(compare({}));

  CHECK(table.to_text().find("qehvi") != std::string::npos);
  CHECK(table.to_csv().rfind("rank,", 0) == 0);
  CHECK(nlohmann::json::parse(table.to_json())["rows"].size() == 3);
}

}
