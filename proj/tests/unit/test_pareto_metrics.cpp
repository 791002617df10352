#include <filesystem>
#include <random>

#include "doctest.h"
#include "invdoe/pareto_metrics.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace invdoe;
using namespace invdoe::pareto;

TEST_SUITE("pareto_metrics") {

TEST_CASE("dominance") {
  CHECK(dominates(Vector{1, 2}, Vector{2, 2}));
  CHECK_FALSE(dominates(Vector{1, 2}, Vector{1, 2}));
  CHECK_FALSE(dominates(Vector{1, 3}, Vector{2, 2}));
  CHECK(weakly_dominates(Vector{1, 2}, Vector{1, 2}));
  CHECK_THROWS_AS(dominates(Vector{1, 2}, Vector{1, 2, 3}), DimensionError);
}

TEST_CASE("sense conversion round trip") {
  const std::vector<Sense> senses{Sense::Maximize, Sense::Minimize};
  const Vector y{3.0, -2.0};
  const Vector m = to_minimization(y, senses);
  CHECK(m == Vector{-3.0, -2.0});
  CHECK(from_minimization(m, senses) == y);
}

TEST_CASE("pareto_filter matches brute force") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + trial % 3;
    const std::size_t n = 1 + rng() % 48;
    auto pts = oracle::random_points(rng, n, m);
    if (trial % 4 == 0) {
      // integer grid: exact ties and duplicates
      for (auto& p : pts) {
        for (auto& v : p) v = std::floor(v * 4);
      }
    }
    CHECK(nondominated_indices(pts) == oracle::nondominated(pts));
  }
}

TEST_CASE("pareto_filter edge cases") {
  CHECK(pareto_filter(std::vector<Vector>{}).empty());
  CHECK(pareto_filter(std::vector<Vector>{{1, 1}, {1, 1}}).size() == 1);
  CHECK(pareto_filter(std::vector<Vector>{{0, 1}, {1, 0}, {1, 1}}).size() == 2);
  CHECK_THROWS_AS(pareto_filter(std::vector<Vector>{{0, 1}, {1}}), DimensionError);
  CHECK_THROWS(pareto_filter(std::vector<Vector>{{0, NAN}}));
}

TEST_CASE("hypervolume against inclusion-exclusion") {
  std::mt19937_64 rng(3);
  for (std::size_t m : {2u, 3u, 4u}) {
    for (int trial = 0; trial < 40; ++trial) {
      const auto pts = oracle::random_points(rng, 1 + rng() % 8, m);
      const Vector ref(m, 1.1);
      CHECK(hypervolume(pts, ref) == doctest::Approx(oracle::hv_inclusion_exclusion(pts, ref)).epsilon(1e-10));
    }
  }
}

TEST_CASE("hypervolume known values") {
  CHECK(hypervolume(std::vector<Vector>{{0, 0}}, Vector{1, 1}) == doctest::Approx(1.0));
  CHECK(hypervolume(std::vector<Vector>{{0, 1}, {1, 0}}, Vector{2, 2}) == doctest::Approx(3.0));
  CHECK(hypervolume(std::vector<Vector>{}, Vector{1, 1}) == 0.0);
  CHECK_THROWS_AS(hypervolume(std::vector<Vector>{{2, 0}}, Vector{1, 1}), InvalidReferencePointError);
}

TEST_CASE("hypervolume in five objectives is a Monte Carlo estimate") {
  const std::vector<Vector> front{{0.5, 0.5, 0.5, 0.5, 0.5}};
  const auto r = hypervolume_detailed(front, Vector(5, 1.0));
  CHECK_FALSE(r.exact);
  CHECK(r.value == doctest::Approx(std::pow(0.5, 5)).epsilon(0.05));
}

TEST_CASE("gd and igd") {
  const ReferenceFront ref{{0, 1}, {1, 0}};
  const std::vector<Vector> front{{0, 2}};
  CHECK(gd(front, ref) == doctest::Approx(1.0));
  CHECK(igd(front, ref) == doctest::Approx(oracle::mean_min_distance(ref, front)));
  CHECK(gd(std::vector<Vector>(ref.begin(), ref.end()), ref) == 0.0);
  CHECK_THROWS_AS(gd({}, ref), UndefinedMetricError);
  CHECK_THROWS_AS(igd(front, {}), UndefinedMetricError);
}

TEST_CASE("spacing and spread") {
  CHECK_FALSE(spacing({{1, 1}}).has_value());
  CHECK(*spacing({{0, 1}, {1, 0}}) == 0.0);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto f = oracle::random_front_2d(rng, 2 + t % 7);
    CHECK(*spacing(f) == doctest::Approx(*oracle::schott_spacing(f)));
  }
  CHECK(max_spread({{1, 1}}) == 0.0);
  CHECK(max_spread({{0, 3}, {4, 0}}) == doctest::Approx(5.0));
}

TEST_CASE("metrics report serialization") {
  const ReferenceFront ref{{0, 1}, {0.5, 0.5}, {1, 0}};
  const auto report = metrics_report({{0, 1}, {1, 0}}, ref, Vector{2, 2});
  const std::string text = report_to_json(report);
  const auto doc = nlohmann::ordered_json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"metrics", "pareto_size", "status"});
  std::vector<std::string> metric_keys;
  for (const auto& [k, v] : doc.at("metrics").items()) metric_keys.push_back(k);
  CHECK(metric_keys == std::vector<std::string>{"generational_distance_gd", "hypervolume_hv",
                                                "inverted_generational_distance_igd",
                                                "maximum_spread_ms", "spacing_sp"});
  CHECK(doc.at("status") == "success");
  const auto back = report_from_json(text);
  CHECK(*back.gd == *report.gd);
  CHECK(*back.hv == *report.hv);
  CHECK(back.pareto_size == 2);

  const auto details = report_details_from_json(report_details_to_json(report));
  CHECK(details.reference_point == Vector{2, 2});
}

TEST_CASE("singleton front reports null spacing") {
  const auto report = metrics_report({{0.5, 0.5}}, {{0, 1}, {1, 0}}, Vector{2, 2});
  CHECK_FALSE(report.spacing.has_value());
  CHECK(*report.max_spread == 0.0);
  const auto doc = nlohmann::json::parse(report_to_json(report));
  CHECK(doc["metrics"]["spacing_sp"].is_null());
  CHECK(format_metric(report.spacing) == "N/A");
}

TEST_CASE("default reference point and clipping") {
  const Vector r = default_reference_point({{0, 1}, {1, 0}}, {});
  CHECK(r[0] == doctest::Approx(1.1));
  CHECK(r[1] == doctest::Approx(1.1));
  const ReferenceFront ref{{0, 1}, {1, 0}};
  CHECK_THROWS_AS(metrics_report({{0, 1}, {3, 0}}, ref, Vector{2, 2}), InvalidReferencePointError);
  const auto clipped = metrics_report({{0, 1}, {3, 0}}, ref, Vector{2, 2}, HvPolicy::ClipToReference);
  CHECK(*clipped.hv == doctest::Approx(2.0));
}

TEST_CASE("front csv round trip") {
  const auto path = std::filesystem::temp_directory_path() / "invdoe_front_test.csv";
  const ParetoFront front{{{0.1, 0.2}, {1.0, 2.0}}, {{0.3, 0.4}, {0.5, 1.5}}};
  write_front_csv(path, front, true);
  const auto back = read_front_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[1].f == front[1].f);
  CHECK(back[0].x == front[0].x);
  std::filesystem::remove(path);
}

}
