#include <filesystem>

#include "doctest.h"
#include "invdoe/http_service.hpp"
#include "json.hpp"

// after Eigen: httplib pulls in system headers that clash with it
#include "httplib.h"

using namespace invdoe;
using namespace invdoe::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ServiceConfig quick(const std::string& problem = "resin-demo") {
  ServiceConfig cfg;
  cfg.problem = problem;
  cfg.n_mc = 128;
  cfg.starts = 4;
  return cfg;
}

const char* kListing1 = R"({"Potlife": 18, "Viscosity": 11, "Adhesion": 0.25, "Hardness": 70})";

json observation(const problems::ProblemSpec& p, const Vector& x) {
  json params = json::object(), props = json::object();
  const auto y = p.evaluate(x).y;
  for (std::size_t d = 0; d < x.size(); ++d) params[p.constraints.names()[d]] = x[d];
  for (std::size_t m = 0; m < y.size(); ++m) props[p.objective_names[m]] = y[m];
  return {{"parameters", params}, {"properties", props}};
}

}  // namespace

TEST_SUITE("http_service") {

TEST_CASE("healthz") {
  Service s(quick());
  const auto r = s.healthz();
  CHECK(r.status == 200);
  CHECK(r.body == R"({"status":"ok"})");
}

TEST_CASE("optimize returns the suggestion shape inside bounds") {
  Service s(quick());
  const auto r = s.optimize(kListing1);
  REQUIRE(r.status == 200);
  const auto doc = json::parse(r.body);
  const auto& next = doc.at("next_suggestion");
  CHECK(next.at("expected_improvement") == "Next best trial to try");
  const auto& params = next.at("parameters");
  const auto& c = s.problem().constraints;
  REQUIRE(params.size() == 8);
  for (std::size_t d = 0; d < 8; ++d) {
    const double v = params.at(c.names()[d]).get<double>();
    CHECK(v >= c.lower()[d]);
    CHECK(v <= c.upper()[d]);
  }
  CHECK(s.optimize(kListing1).body == r.body);
}

TEST_CASE("request validation") {
  Service s(quick());
  CHECK(s.optimize("not json").status == 400);
  CHECK(s.optimize("[1,2]").status == 400);
  const auto unknown = s.optimize(R"({"Potlife": 18, "Viscosity": 11, "Adhesion": 0.25, "Hardness": 70, "Gloss": 1})");
  CHECK(unknown.status == 400);
  CHECK(json::parse(unknown.body).at("message").get<std::string>().find("Gloss") != std::string::npos);
  CHECK(s.optimize(R"({"Potlife": 18})").status == 400);
  CHECK(s.optimize(R"({"Potlife": "x", "Viscosity": 11, "Adhesion": 0.25, "Hardness": 70})").status == 400);
  CHECK(s.observe(R"({"parameters": {}})").status == 400);
}

TEST_CASE("observe then metrics") {
  Service s(quick("constrained-biobj"));
  const auto& p = s.problem();
  const auto empty = json::parse(s.metrics().body);
  CHECK(empty.at("pareto_size") == 0);
  CHECK(empty.at("metrics").is_null());

  for (const Vector& x : {Vector{0.5, 0.0}, Vector{0.9, 0.1}, Vector{0.2, 0.1}}) {
    const auto r = s.observe(observation(p, x).dump());
    CHECK(r.status == 200);
  }
  const auto doc = json::parse(s.metrics().body);
  CHECK(doc.at("status") == "success");
  CHECK(doc.at("pareto_size").get<int>() >= 1);
  CHECK(doc.at("metrics").at("generational_distance_gd").get<double>() >= 0.0);

  auto bad = observation(p, {0.5, 0.0});
  bad["parameters"]["x1"] = 9.0;
  CHECK(s.observe(bad.dump()).status == 400);
}

TEST_CASE("sessions") {
  Service s(quick("constrained-biobj"));
  CHECK(s.metrics("lab-b").status == 409);
  CHECK(s.optimize(R"({"f1": 0.2, "f2": 0.3})", "lab-b").status == 409);
  CHECK(s.observe(observation(s.problem(), {0.5, 0.0}).dump(), "lab-b").status == 200);
  CHECK(json::parse(s.metrics("lab-b").body).at("pareto_size") == 1);
  CHECK(json::parse(s.metrics().body).at("pareto_size") == 0);
}

TEST_CASE("qehvi strategy") {
  ServiceConfig cfg = quick("constrained-biobj");
  cfg.strategy = bench::Strategy::Qehvi;
  Service s(cfg);
  const auto r = s.optimize(R"({"f1": 0.2, "f2": 0.3})");
  REQUIRE(r.status == 200);
  const auto params = json::parse(r.body)["next_suggestion"]["parameters"];
  CHECK(s.problem().constraints.is_feasible(Vector{params["x1"], params["x2"]}));
}

TEST_CASE("log directory replay") {
  const auto dir = fs::temp_directory_path() / "invdoe_service_log";
  fs::remove_all(dir);
  ServiceConfig cfg = quick("constrained-biobj");
  cfg.log_dir = dir;
  std::string before;
  {
    Service s(cfg);
    s.observe(observation(s.problem(), {0.5, 0.0}).dump());
    s.observe(observation(s.problem(), {0.8, 0.0}).dump(), "other");
    before = s.metrics().body;
  }
  Service again(cfg);
  CHECK(again.metrics().body == before);
  CHECK(json::parse(again.metrics("other").body).at("pareto_size") == 1);
  fs::remove_all(dir);
}

TEST_CASE("snapshot fixture reproduces the stored report") {
  ServiceConfig cfg = quick();
  cfg.snapshot = fs::path(INVDOE_FIXTURES) / "listing2_session.json";
  Service s(cfg);
  const auto doc = json::parse(s.metrics().body);
  CHECK(doc.at("pareto_size") == 11);
  CHECK(doc.at("metrics").at("generational_distance_gd").get<double>() ==
        doctest::Approx(15.025390934257677).epsilon(1e-12));
  // a new observation unpins the stored report
  const auto snap = json::parse(s.snapshot_json());
  CHECK(snap.at("observations").size() == 11);
  CHECK(s.observe(observation(s.problem(), s.problem().prior_x[0]).dump()).status == 200);
  CHECK(json::parse(s.metrics().body).at("metrics").at("generational_distance_gd").get<double>() !=
        doctest::Approx(15.025390934257677));

  ServiceConfig wrong = quick("constrained-biobj");
  wrong.snapshot = cfg.snapshot;
  CHECK_THROWS(Service(wrong));
}

TEST_CASE("served over http") {
  Service s(quick("constrained-biobj"));
  const int port = s.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Content-Type") == "application/json");
  auto obs = client.Post("/observe", observation(s.problem(), {0.5, 0.0}).dump(), "application/json");
  REQUIRE(obs);
  CHECK(obs->status == 200);
  auto opt = client.Post("/optimize", R"({"f1": 0.2, "f2": 0.3})", "application/json");
  REQUIRE(opt);
  CHECK(opt->status == 200);
  auto bad = client.Post("/optimize", R"({"f9": 1})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  auto met = client.Get("/metrics");
  REQUIRE(met);
  CHECK(json::parse(met->body).at("pareto_size") == 1);
  httplib::Headers h{{kSessionHeader, "ghost"}};
  auto ghost = client.Get("/metrics", h);
  REQUIRE(ghost);
  CHECK(ghost->status == 409);
  s.stop();
}

}
