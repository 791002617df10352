#include "invdoe/http_service.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace invdoe::service {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kSuggestionText = "Next best trial to try";

Response error(int status, const std::string& message) {
  return {status, json{{"status", "error"}, {"message", message}}.dump()};
}

struct BadRequest : Error {
  using Error::Error;
};

// Reads an object of exactly `names` -> finite numbers, in `names` order.
Vector named_values(const nlohmann::json& obj, const std::vector<std::string>& names,
                    const char* what) {
  if (!obj.is_object()) throw BadRequest(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      throw BadRequest(std::string("unknown ") + what + " key '" + key + "'");
    }
  }
  Vector out;
  for (const auto& name : names) {
    if (!obj.contains(name)) throw BadRequest(std::string("missing ") + what + " key '" + name + "'");
    const auto& v = obj.at(name);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw BadRequest(std::string(what) + " '" + name + "' must be a finite number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

struct Session {
  std::mutex mutex;
  std::vector<Vector> xs;
  std::vector<Vector> ys;  // raw senses
  std::vector<bool> feasible;
  // Pinned report from a snapshot, valid while the observation count matches.
  std::optional<std::string> pinned_report;
  std::size_t pinned_count = 0;
  // Baseline models keyed by observation count.
  std::size_t cached_count = static_cast<std::size_t>(-1);
  std::shared_ptr<const std::vector<gp::GpModel>> cached_models;
};

struct Snapshot {
  std::vector<Vector> xs, ys;
  std::vector<bool> feasible;
};

}  // namespace

struct Service::Impl {
  ServiceConfig cfg;
  problems::ProblemSpec problem;
  std::vector<Vector> prior_x, prior_y;
  std::mutex sessions_mutex;
  std::map<std::string, std::unique_ptr<Session>> sessions;
  std::mutex log_mutex;
  httplib::Server server;
  std::thread thread;

  Session* find(const std::string& name, bool create) {
    std::lock_guard lock(sessions_mutex);
    auto it = sessions.find(name);
    if (it != sessions.end()) return it->second.get();
    if (!create) return nullptr;
    return sessions.emplace(name, std::make_unique<Session>()).first->second.get();
  }

  std::filesystem::path log_path(const std::string& name) const {
    return *cfg.log_dir / ("session_" + (name.empty() ? std::string("default") : name) + ".jsonl");
  }

  void append_log(const std::string& name, const Vector& x, const Vector& y, bool feasible) {
    if (!cfg.log_dir) return;
    std::lock_guard lock(log_mutex);
    std::filesystem::create_directories(*cfg.log_dir);
    std::ofstream out(log_path(name), std::ios::app);
    out << json{{"x", x}, {"y", y}, {"feasible", feasible}}.dump() << '\n';
  }

  void replay_logs() {
    if (!cfg.log_dir || !std::filesystem::exists(*cfg.log_dir)) return;
    for (const auto& entry : std::filesystem::directory_iterator(*cfg.log_dir)) {
      const std::string file = entry.path().filename().string();
      if (file.rfind("session_", 0) != 0 || entry.path().extension() != ".jsonl") continue;
      std::string name = entry.path().stem().string().substr(8);
      if (name == "default") name.clear();
      Session* s = find(name, true);
      std::ifstream in(entry.path());
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        s->xs.push_back(j.at("x").get<Vector>());
        s->ys.push_back(j.at("y").get<Vector>());
        s->feasible.push_back(j.at("feasible").get<bool>());
      }
    }
  }

  void load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open snapshot '" + path.string() + "'");
    const auto doc = nlohmann::json::parse(in);
    if (doc.value("version", 0) != 1) throw Error("snapshot: unsupported version");
    if (doc.at("problem").get<std::string>() != problem.id) {
      throw Error("snapshot: problem '" + doc.at("problem").get<std::string>() +
                  "' does not match service problem '" + problem.id + "'");
    }
    Session* s = find("", true);
    for (const auto& o : doc.at("observations")) {
      s->xs.push_back(o.at("x").get<Vector>());
      s->ys.push_back(o.at("y").get<Vector>());
      s->feasible.push_back(o.value("feasible", true));
    }
    if (doc.contains("metrics_report")) {
      // Re-serialize through the report type so the wire shape is canonical.
      s->pinned_report = pareto::report_to_json(
          pareto::report_from_json(doc.at("metrics_report").dump()));
      s->pinned_count = s->xs.size();
    }
  }

  std::string report_for(const std::vector<Vector>& ys, const std::vector<bool>& feasible) const {
    std::vector<Vector> images;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (feasible[i]) images.push_back(problem.minimized(ys[i]));
    }
    pareto::MetricsReport report;
    if (images.empty()) {
      report.warning = "no feasible observations";
    } else {
      report = pareto::metrics_report(pareto::pareto_filter(images), problem.reference_front,
                                      problem.reference_point, pareto::HvPolicy::ClipToReference);
    }
    return pareto::report_to_json(report);
  }
};

Service::Service(ServiceConfig cfg) : impl_(std::make_unique<Impl>()) {
  impl_->cfg = std::move(cfg);
  if (impl_->cfg.strategy != bench::Strategy::Baseline && impl_->cfg.strategy != bench::Strategy::Qehvi) {
    throw Error("service strategy must be baseline or qehvi");
  }
  impl_->problem = problems::make_problem(impl_->cfg.problem, 0);
  if (!impl_->problem.prior_x.empty()) {
    impl_->prior_x = impl_->problem.prior_x;
    impl_->prior_y = impl_->problem.prior_y;
  } else {
    impl_->prior_x = impl_->problem.constraints.sample_feasible(
        std::max<std::size_t>(impl_->cfg.prior_size, 2), derive_seed(impl_->cfg.seed, 0x9A));
    for (const auto& x : impl_->prior_x) impl_->prior_y.push_back(impl_->problem.evaluate(x).y);
  }
  impl_->find("", true);
  impl_->replay_logs();
  if (impl_->cfg.snapshot) impl_->load_snapshot(*impl_->cfg.snapshot);

  auto wrap = [](Response r, httplib::Response& res) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->server.Post("/optimize", [this, wrap](const httplib::Request& req, httplib::Response& res) {
    wrap(optimize(req.body, req.get_header_value(kSessionHeader)), res);
  });
  impl_->server.Post("/observe", [this, wrap](const httplib::Request& req, httplib::Response& res) {
    wrap(observe(req.body, req.get_header_value(kSessionHeader)), res);
  });
  impl_->server.Get("/metrics", [this, wrap](const httplib::Request& req, httplib::Response& res) {
    wrap(metrics(req.get_header_value(kSessionHeader)), res);
  });
  impl_->server.Get("/healthz", [this, wrap](const httplib::Request&, httplib::Response& res) {
    wrap(healthz(), res);
  });
}

Service::~Service() { stop(); }

const ServiceConfig& Service::config() const { return impl_->cfg; }
const problems::ProblemSpec& Service::problem() const { return impl_->problem; }

Response Service::healthz() const { return {200, json{{"status", "ok"}}.dump()}; }

Response Service::optimize(const std::string& body, const std::string& session_name) {
  Session* session = impl_->find(session_name, false);
  if (!session) return error(409, "no session '" + session_name + "'");
  const auto& problem = impl_->problem;
  try {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw BadRequest(std::string("malformed JSON: ") + e.what());
    }
    const Vector target = named_values(doc, problem.objective_names, "property");

    // Copy the snapshot so metrics reads are not blocked while fitting.
    std::vector<Vector> xs = impl_->prior_x, ys = impl_->prior_y;
    std::vector<bool> feasible(xs.size(), true);
    std::size_t count = 0;
    std::shared_ptr<const std::vector<gp::GpModel>> models;
    {
      std::lock_guard lock(session->mutex);
      count = session->xs.size();
      xs.insert(xs.end(), session->xs.begin(), session->xs.end());
      ys.insert(ys.end(), session->ys.begin(), session->ys.end());
      feasible.insert(feasible.end(), session->feasible.begin(), session->feasible.end());
      if (session->cached_count == count) models = session->cached_models;
    }
    for (std::size_t i = 0; i < feasible.size(); ++i) {
      feasible[i] = feasible[i] && problem.constraints.is_feasible(xs[i]);
    }
    const std::uint64_t seed = derive_seed(impl_->cfg.seed, 0x0B, count);
    acq::CandidateBatch chosen;
    if (impl_->cfg.strategy == bench::Strategy::Baseline) {
      if (!models) {
        std::vector<Vector> ys_min;
        for (const auto& y : ys) ys_min.push_back(problem.minimized(y));
        models = std::make_shared<const std::vector<gp::GpModel>>(bench::fit_objective_models(
            xs, ys_min, problem.constraints, gp::KernelFamily::Matern52,
            derive_seed(impl_->cfg.seed, 0x0F, count)));
        std::lock_guard lock(session->mutex);
        if (session->xs.size() == count) {
          session->cached_count = count;
          session->cached_models = models;
        }
      }
      auto ctx = bench::make_context(problem, *models, xs, ys, feasible, impl_->cfg.n_mc,
                                     derive_seed(seed, 1), impl_->cfg.starts);
      chosen = acq::baseline_suggest(ctx, problem.minimized(target), seed);
    } else {
      // Target matching as a multi-objective problem over |f_m - t_m|.
      problems::ProblemSpec matched = problem;
      matched.senses.assign(problem.n_objectives, Sense::Minimize);
      std::vector<Vector> devs;
      for (const auto& y : ys) {
        Vector d(y.size());
        for (std::size_t m = 0; m < y.size(); ++m) d[m] = std::abs(y[m] - target[m]);
        devs.push_back(std::move(d));
      }
      matched.reference_point = pareto::default_reference_point(devs, {});
      auto dev_models = bench::fit_objective_models(xs, devs, problem.constraints,
                                                    gp::KernelFamily::Matern52,
                                                    derive_seed(impl_->cfg.seed, 0x0F, count));
      auto ctx = bench::make_context(matched, std::move(dev_models), xs, devs, feasible,
                                     impl_->cfg.n_mc, derive_seed(seed, 1), impl_->cfg.starts);
      chosen = acq::optimize_qehvi(ctx, 1, seed);
    }

    json parameters = json::object();
    const auto& names = problem.constraints.names();
    for (std::size_t d = 0; d < names.size(); ++d) parameters[names[d]] = chosen.points.front()[d];
    json out;
    out["next_suggestion"] = {{"ei_value", chosen.acquisition_value},
                              {"expected_improvement", kSuggestionText},
                              {"parameters", parameters}};
    return {200, out.dump(2)};
  } catch (const BadRequest& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

Response Service::observe(const std::string& body, const std::string& session_name) {
  const auto& problem = impl_->problem;
  try {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw BadRequest(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw BadRequest("body must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (key != "parameters" && key != "properties" && key != "feasible") {
        throw BadRequest("unknown key '" + key + "'");
      }
    }
    if (!doc.contains("parameters")) throw BadRequest("missing key 'parameters'");
    if (!doc.contains("properties")) throw BadRequest("missing key 'properties'");
    const Vector x = named_values(doc.at("parameters"), problem.constraints.names(), "parameter");
    const Vector y = named_values(doc.at("properties"), problem.objective_names, "property");
    for (std::size_t d = 0; d < x.size(); ++d) {
      if (x[d] < problem.constraints.lower()[d] || x[d] > problem.constraints.upper()[d]) {
        throw BadRequest("parameter '" + problem.constraints.names()[d] + "' out of bounds");
      }
    }
    bool feasible = true;
    if (doc.contains("feasible")) {
      if (!doc.at("feasible").is_boolean()) throw BadRequest("'feasible' must be a boolean");
      feasible = doc.at("feasible").get<bool>();
    }
    feasible = feasible && problem.constraints.is_feasible(x);

    Session* session = impl_->find(session_name, true);
    std::size_t count = 0;
    {
      std::lock_guard lock(session->mutex);
      session->xs.push_back(x);
      session->ys.push_back(y);
      session->feasible.push_back(feasible);
      session->cached_models.reset();
      session->cached_count = static_cast<std::size_t>(-1);
      count = session->xs.size();
      impl_->append_log(session_name, x, y, feasible);
    }
    return {200, json{{"status", "success"}, {"observations", count}}.dump()};
  } catch (const BadRequest& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

Response Service::metrics(const std::string& session_name) {
  Session* session = impl_->find(session_name, false);
  if (!session) return error(409, "no session '" + session_name + "'");
  std::vector<Vector> ys;
  std::vector<bool> feasible;
  {
    std::lock_guard lock(session->mutex);
    if (session->pinned_report && session->pinned_count == session->xs.size()) {
      return {200, *session->pinned_report};
    }
    ys = session->ys;
    feasible = session->feasible;
  }
  try {
    return {200, impl_->report_for(ys, feasible)};
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

std::string Service::snapshot_json(const std::string& session_name) {
  Session* session = impl_->find(session_name, false);
  if (!session) throw NotFoundError("no session '" + session_name + "'");
  json obs = json::array();
  std::vector<Vector> ys;
  std::vector<bool> feasible;
  {
    std::lock_guard lock(session->mutex);
    for (std::size_t i = 0; i < session->xs.size(); ++i) {
      obs.push_back({{"x", session->xs[i]}, {"y", session->ys[i]}, {"feasible", static_cast<bool>(session->feasible[i])}});
    }
    ys = session->ys;
    feasible = session->feasible;
  }
  json doc;
  doc["version"] = 1;
  doc["problem"] = impl_->problem.id;
  doc["observations"] = obs;
  doc["metrics_report"] = json::parse(metrics(session_name).body);
  return doc.dump(2);
}

bool Service::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int Service::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace invdoe::service
