#include "invdoe/bench_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "csv.hpp"
#include "json.hpp"

namespace invdoe::bench {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

json trial_to_json(const Trial& t) {
  return {{"type", "trial"},
          {"iteration", t.iteration},
          {"x", t.x},
          {"y", t.y},
          {"feasible", t.feasible},
          {"wall_time_ms", t.wall_time_ms}};
}

Trial trial_from_json(const nlohmann::json& j) {
  Trial t;
  t.iteration = j.at("iteration").get<std::size_t>();
  t.x = j.at("x").get<Vector>();
  t.y = j.at("y").get<Vector>();
  t.feasible = j.at("feasible").get<bool>();
  t.wall_time_ms = j.value("wall_time_ms", 0.0);
  return t;
}

json front_to_json(const pareto::ParetoFront& front) {
  json arr = json::array();
  for (const auto& m : front) arr.push_back({{"x", m.x}, {"f", m.f}});
  return arr;
}

pareto::ParetoFront front_from_json(const nlohmann::json& j) {
  pareto::ParetoFront front;
  for (const auto& m : j) front.push_back({m.at("x").get<Vector>(), m.at("f").get<Vector>()});
  return front;
}

json timings_to_json(const Timings& t) {
  return {{"fit_ms", t.fit_ms},
          {"acquisition_ms", t.acquisition_ms},
          {"inference_ms", t.inference_ms},
          {"training_ms", t.training_ms}};
}

Timings timings_from_json(const nlohmann::json& j) {
  return {j.value("fit_ms", 0.0), j.value("acquisition_ms", 0.0), j.value("inference_ms", 0.0),
          j.value("training_ms", 0.0)};
}

json config_json(const RunConfig& c) {
  return {{"problem", c.problem},
          {"strategy", to_string(c.strategy)},
          {"budget", c.budget},
          {"init_size", c.init_size},
          {"q", c.q},
          {"seed", c.seed},
          {"n_mc", c.n_mc},
          {"starts", c.starts},
          {"kernel", gp::to_string(c.kernel)},
          {"train_size", c.train_size},
          {"lambda", c.lambda},
          {"epochs", c.epochs}};
}

RunConfig config_from(const nlohmann::json& j) {
  RunConfig c;
  c.problem = j.at("problem").get<std::string>();
  c.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  c.budget = j.value("budget", c.budget);
  c.init_size = j.value("init_size", c.init_size);
  c.q = j.value("q", c.q);
  c.seed = j.value("seed", c.seed);
  c.n_mc = j.value("n_mc", c.n_mc);
  c.starts = j.value("starts", c.starts);
  if (j.contains("kernel")) c.kernel = gp::kernel_family_from_string(j.at("kernel").get<std::string>());
  c.train_size = j.value("train_size", c.train_size);
  c.lambda = j.value("lambda", c.lambda);
  c.epochs = j.value("epochs", c.epochs);
  return c;
}

pareto::ParetoFront feasible_front(const problems::ProblemSpec& problem,
                                   const std::vector<Trial>& trials) {
  std::vector<pareto::FrontMember> pts;
  for (const auto& t : trials) {
    if (t.feasible) pts.push_back({t.x, problem.minimized(t.y)});
  }
  return pareto::pareto_filter(pts);
}

// Counts every ground-truth evaluation made on behalf of a run.
struct CountingEvaluator {
  const problems::ProblemSpec& problem;
  std::size_t calls = 0;

  problems::Evaluation operator()(std::span<const double> x) {
    ++calls;
    return problem.evaluate(x);
  }
};

Vector uniform_feasible(const problems::ConstraintSpec& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool project = c.has_equalities();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector u(c.dim());
    for (double& v : u) v = unit(rng);
    Vector x = c.from_unit(u);
    if (project) x = c.project(x);
    if (c.is_feasible(x)) return x;
  }
  throw InfeasibleRegionError("infeasible search region");
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Qehvi: return "qehvi";
    case Strategy::Baseline: return "baseline";
    case Strategy::InverseRegressor: return "inverse-regressor";
    case Strategy::Random: return "random";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& text) {
  if (text == "qehvi") return Strategy::Qehvi;
  if (text == "baseline") return Strategy::Baseline;
  if (text == "inverse-regressor") return Strategy::InverseRegressor;
  if (text == "random") return Strategy::Random;
  throw NotFoundError("unknown strategy '" + text +
                      "'; expected qehvi, baseline, inverse-regressor or random");
}

void RunConfig::validate() const {
  if (budget == 0) throw Error("run config: budget must be at least 1");
  if (q == 0) throw Error("run config: q must be at least 1");
  if (n_mc == 0) throw Error("run config: n_mc must be at least 1");
  if (strategy != Strategy::InverseRegressor) {
    if (init_size == 0 || init_size > budget) {
      throw Error("run config: init_size must lie in [1, budget]");
    }
    if (strategy != Strategy::Random && init_size < 2 && budget > init_size) {
      throw Error("run config: model-based strategies need init_size >= 2");
    }
  }
}

double feasible_hypervolume(const problems::ProblemSpec& problem, const std::vector<Trial>& trials) {
  std::vector<Vector> inside;
  for (const auto& t : trials) {
    if (!t.feasible) continue;
    Vector f = problem.minimized(t.y);
    if (pareto::weakly_dominates(f, problem.reference_point)) inside.push_back(std::move(f));
  }
  return pareto::hypervolume(inside, problem.reference_point);
}

std::vector<gp::GpModel> fit_objective_models(const std::vector<Vector>& xs,
                                              const std::vector<Vector>& ys_min,
                                              const problems::ConstraintSpec& constraints,
                                              gp::KernelFamily family, std::uint64_t seed) {
  check_same_dimension(xs.size(), ys_min.size(), "fit_objective_models");
  if (ys_min.empty()) throw Error("fit_objective_models: no observations");
  std::vector<gp::GpModel> models;
  for (std::size_t m = 0; m < ys_min.front().size(); ++m) {
    gp::FitConfig cfg;
    cfg.family = family;
    cfg.seed = derive_seed(seed, 0x4D, m);
    cfg.lower = constraints.lower();
    cfg.upper = constraints.upper();
    Vector ys;
    ys.reserve(ys_min.size());
    for (const auto& y : ys_min) ys.push_back(y[m]);
    models.push_back(gp::fit(xs, ys, cfg));
  }
  return models;
}

acq::AcquisitionContext make_context(const problems::ProblemSpec& problem,
                                     std::vector<gp::GpModel> models,
                                     const std::vector<Vector>& xs,
                                     const std::vector<Vector>& ys,
                                     const std::vector<bool>& feasible, std::size_t n_mc,
                                     std::uint64_t mc_seed, std::size_t starts) {
  acq::AcquisitionContext ctx;
  ctx.objective_models = std::move(models);
  ctx.ref_point = problem.reference_point;
  ctx.constraints = problem.constraints;
  ctx.n_mc = n_mc;
  ctx.mc_seed = mc_seed;
  ctx.starts = starts;
  std::vector<Vector> inside;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!feasible[i]) continue;
    ctx.observed_inputs.push_back(xs[i]);
    Vector f = problem.minimized(ys[i]);
    if (pareto::weakly_dominates(f, ctx.ref_point)) inside.push_back(std::move(f));
  }
  ctx.current_front = pareto::pareto_filter(inside);
  return ctx;
}

RunLog run_bo(const RunConfig& cfg, RunObserver* observer) {
  cfg.validate();
  if (cfg.strategy == Strategy::InverseRegressor) {
    throw Error("run_bo: strategy must be qehvi, baseline or random");
  }
  const problems::ProblemSpec problem = problems::make_problem(cfg.problem, 0);
  CountingEvaluator evaluate{problem};
  RunLog log;
  log.config = cfg;
  if (observer) observer->on_start(cfg);

  auto record = [&](Trial t) {
    if (observer) observer->on_trial(t);
    log.trials.push_back(std::move(t));
  };
  auto close_iteration = [&](std::size_t iteration) {
    log.cumulative_hv.push_back(feasible_hypervolume(problem, log.trials));
    if (observer) observer->on_iteration(iteration, log.cumulative_hv.back());
  };

  try {
    auto t0 = Clock::now();
    const auto init = problem.constraints.sample_feasible(cfg.init_size, derive_seed(cfg.seed, 0x11));
    const double init_ms = ms_since(t0) / static_cast<double>(init.size());
    for (const auto& x : init) {
      const auto t1 = Clock::now();
      const problems::Evaluation e = evaluate(x);
      record({0, x, e.y, e.feasible, init_ms + ms_since(t1)});
    }
    close_iteration(0);

    std::mt19937_64 random_rng(derive_seed(cfg.seed, 0x55));
    Vector ideal(problem.n_objectives, std::numeric_limits<double>::infinity());
    for (const auto& f : problem.reference_front) {
      for (std::size_t m = 0; m < f.size(); ++m) ideal[m] = std::min(ideal[m], f[m]);
    }

    for (std::size_t iteration = 1; log.trials.size() < cfg.budget; ++iteration) {
      const std::size_t remaining = cfg.budget - log.trials.size();
      const std::size_t k = cfg.strategy == Strategy::Baseline ? 1 : std::min(cfg.q, remaining);
      const auto it0 = Clock::now();
      std::vector<Vector> batch;
      if (cfg.strategy == Strategy::Random) {
        for (std::size_t j = 0; j < k; ++j) batch.push_back(uniform_feasible(problem.constraints, random_rng));
      } else {
        std::vector<Vector> xs, ys, ys_min;
        std::vector<bool> feasible;
        for (const auto& t : log.trials) {
          xs.push_back(t.x);
          ys.push_back(t.y);
          ys_min.push_back(problem.minimized(t.y));
          feasible.push_back(t.feasible);
        }
        auto fit0 = Clock::now();
        auto models = fit_objective_models(xs, ys_min, problem.constraints, cfg.kernel,
                                           derive_seed(cfg.seed, 0x22, iteration));
        log.timings.fit_ms += ms_since(fit0);
        auto acq0 = Clock::now();
        const auto ctx = make_context(problem, std::move(models), xs, ys, feasible, cfg.n_mc,
                                      derive_seed(cfg.seed, 0x33, iteration), cfg.starts);
        const std::uint64_t acq_seed = derive_seed(cfg.seed, 0x44, iteration);
        const acq::CandidateBatch chosen = cfg.strategy == Strategy::Qehvi
                                               ? acq::optimize_qehvi(ctx, k, acq_seed)
                                               : acq::baseline_suggest(ctx, ideal, acq_seed);
        log.timings.acquisition_ms += ms_since(acq0);
        batch = chosen.points;
      }
      const double per_trial_ms = ms_since(it0) / static_cast<double>(batch.size());
      for (const auto& x : batch) {
        const auto t1 = Clock::now();
        const problems::Evaluation e = evaluate(x);
        record({iteration, x, e.y, e.feasible, per_trial_ms + ms_since(t1)});
      }
      close_iteration(iteration);
    }
  } catch (const Error& e) {
    log.final_front = feasible_front(problem, log.trials);
    log.evaluator_calls = evaluate.calls;
    throw RunFailed(std::string("run failed: ") + e.what(), std::move(log));
  }
  log.final_front = feasible_front(problem, log.trials);
  log.evaluator_calls = evaluate.calls;
  if (observer) observer->on_finish(log);
  return log;
}

std::vector<Vector> front_targets(const problems::ProblemSpec& problem, std::size_t count) {
  if (count == 0) return {};
  std::vector<Vector> front = problem.reference_front;
  if (front.empty()) throw Error("front_targets: empty reference front");
  std::sort(front.begin(), front.end());
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t idx =
        count == 1 ? front.size() / 2
                   : static_cast<std::size_t>(std::llround(static_cast<double>(i) *
                                                           static_cast<double>(front.size() - 1) /
                                                           static_cast<double>(count - 1)));
    out.push_back(pareto::from_minimization(front[idx], problem.senses));
  }
  return out;
}

RunLog run_generative(const problems::ProblemSpec& problem, const inverse::RegressorModel& model,
                      const std::vector<Vector>& targets, const RunConfig& cfg,
                      RunObserver* observer) {
  check_same_dimension(model.input_dim(), problem.n_objectives, "regressor input");
  check_same_dimension(model.output_dim(), problem.dim, "regressor output");
  CountingEvaluator evaluate{problem};
  RunLog log;
  log.config = cfg;
  log.config.problem = problem.id;
  log.config.strategy = Strategy::InverseRegressor;
  log.config.budget = targets.size();
  if (observer) observer->on_start(log.config);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    check_same_dimension(targets[i].size(), problem.n_objectives, "generative target");
    const auto t0 = Clock::now();
    const Vector x = model.predict(targets[i]);
    const double inference_ms = ms_since(t0);
    log.timings.inference_ms += inference_ms;
    const problems::Evaluation e = evaluate(x);
    Trial t{i + 1, x, e.y, e.feasible, inference_ms};
    if (observer) observer->on_trial(t);
    log.trials.push_back(std::move(t));
    log.cumulative_hv.push_back(feasible_hypervolume(problem, log.trials));
    if (observer) observer->on_iteration(i + 1, log.cumulative_hv.back());
  }
  log.final_front = feasible_front(problem, log.trials);
  log.evaluator_calls = evaluate.calls;
  if (observer) observer->on_finish(log);
  return log;
}

RunLog run(const RunConfig& cfg, RunObserver* observer) {
  cfg.validate();
  if (cfg.strategy != Strategy::InverseRegressor) return run_bo(cfg, observer);
  const problems::ProblemSpec problem = problems::make_problem(cfg.problem, 0);
  const auto t0 = Clock::now();
  const auto xs = problem.constraints.sample_feasible(cfg.train_size, derive_seed(cfg.seed, 0x66));
  std::vector<Vector> ys;
  ys.reserve(xs.size());
  for (const auto& x : xs) ys.push_back(problem.evaluate(x).y);
  inverse::TrainConfig tc;
  tc.lambda = cfg.lambda;
  tc.epochs = cfg.epochs;
  const inverse::RegressorModel model = inverse::train(xs, ys, problem.constraints, tc, cfg.seed);
  const double training_ms = ms_since(t0);
  RunLog log = run_generative(problem, model, front_targets(problem, cfg.budget), cfg, nullptr);
  log.config = cfg;
  log.offline_evaluations = xs.size();
  log.timings.training_ms = training_ms;
  if (observer) {
    observer->on_start(log.config);
    for (std::size_t i = 0; i < log.trials.size(); ++i) {
      observer->on_trial(log.trials[i]);
      observer->on_iteration(log.trials[i].iteration, log.cumulative_hv[i]);
    }
    observer->on_finish(log);
  }
  return log;
}

pareto::MetricsReport evaluate_run(const RunLog& log, const problems::ProblemSpec& problem) {
  if (log.trials.empty()) throw Error("evaluate_run: empty run log");
  const pareto::ParetoFront front = feasible_front(problem, log.trials);
  if (front.empty()) {
    pareto::MetricsReport report;
    report.reference_point = problem.reference_point;
    report.warning = "no feasible trials";
    return report;
  }
  return pareto::metrics_report(pareto::objectives_of(front), problem.reference_front,
                                problem.reference_point, pareto::HvPolicy::ClipToReference);
}

bool same_run(const RunLog& a, const RunLog& b) {
  if (config_to_json(a.config) != config_to_json(b.config)) return false;
  if (a.trials.size() != b.trials.size()) return false;
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    const auto& s = a.trials[i];
    const auto& t = b.trials[i];
    if (s.iteration != t.iteration || s.x != t.x || s.y != t.y || s.feasible != t.feasible) return false;
  }
  if (a.cumulative_hv != b.cumulative_hv) return false;
  if (a.final_front.size() != b.final_front.size()) return false;
  for (std::size_t i = 0; i < a.final_front.size(); ++i) {
    if (a.final_front[i].x != b.final_front[i].x || a.final_front[i].f != b.final_front[i].f) {
      return false;
    }
  }
  return a.evaluator_calls == b.evaluator_calls && a.offline_evaluations == b.offline_evaluations;
}

std::string run_stem(const RunConfig& cfg) {
  return cfg.problem + "__" + to_string(cfg.strategy) + "__seed" + std::to_string(cfg.seed);
}

std::string config_to_json(const RunConfig& cfg) { return config_json(cfg).dump(); }

RunConfig config_from_json(const std::string& text) { return config_from(nlohmann::json::parse(text)); }

JsonlRunWriter::JsonlRunWriter(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::trunc);
  if (!out_) throw Error("cannot write '" + path_.string() + "'");
}

void JsonlRunWriter::on_start(const RunConfig& cfg) {
  json line = {{"type", "config"}, {"config", config_json(cfg)}};
  out_ << line.dump() << '\n' << std::flush;
}

void JsonlRunWriter::on_trial(const Trial& t) { out_ << trial_to_json(t).dump() << '\n' << std::flush; }

void JsonlRunWriter::on_iteration(std::size_t iteration, double hv) {
  json line = {{"type", "iteration"}, {"iteration", iteration}, {"cumulative_hv", hv}};
  out_ << line.dump() << '\n' << std::flush;
}

void JsonlRunWriter::on_finish(const RunLog& log) {
  json line = {{"type", "end"},
               {"evaluator_calls", log.evaluator_calls},
               {"offline_evaluations", log.offline_evaluations},
               {"timings", timings_to_json(log.timings)},
               {"final_front", front_to_json(log.final_front)}};
  out_ << line.dump() << '\n' << std::flush;
}

void write_run_log(const std::filesystem::path& jsonl, const RunLog& log) {
  JsonlRunWriter w(jsonl);
  w.on_start(log.config);
  std::size_t next_hv = 0;
  for (std::size_t i = 0; i < log.trials.size(); ++i) {
    w.on_trial(log.trials[i]);
    const bool last_of_iteration =
        i + 1 == log.trials.size() || log.trials[i + 1].iteration != log.trials[i].iteration;
    if (last_of_iteration && next_hv < log.cumulative_hv.size()) {
      w.on_iteration(log.trials[i].iteration, log.cumulative_hv[next_hv++]);
    }
  }
  w.on_finish(log);
}

RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open run log '" + path.string() + "'");
  RunLog log;
  bool have_config = false, have_end = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw Error("run log '" + path.string() + "': malformed line " + std::to_string(line_no));
    }
    const std::string type = j.value("type", "");
    if (type == "config") {
      log.config = config_from(j.at("config"));
      have_config = true;
    } else if (type == "trial") {
      log.trials.push_back(trial_from_json(j));
    } else if (type == "iteration") {
      log.cumulative_hv.push_back(j.at("cumulative_hv").get<double>());
    } else if (type == "end") {
      log.evaluator_calls = j.value("evaluator_calls", std::size_t{0});
      log.offline_evaluations = j.value("offline_evaluations", std::size_t{0});
      log.timings = timings_from_json(j.at("timings"));
      log.final_front = front_from_json(j.at("final_front"));
      have_end = true;
    }
  }
  if (!have_config) throw Error("run log '" + path.string() + "': missing config line");
  if (!have_end) {
    const auto problem = problems::make_problem(log.config.problem, 0);
    log.final_front = feasible_front(problem, log.trials);
    log.evaluator_calls = log.trials.size();
  }
  return log;
}

void write_summary(const std::filesystem::path& path, const RunLog& log,
                   const pareto::MetricsReport& report) {
  json doc;
  doc["config"] = config_json(log.config);
  doc["metrics"] = json::parse(pareto::report_details_to_json(report));
  doc["trials"] = log.trials.size();
  doc["evaluator_calls"] = log.evaluator_calls;
  doc["offline_evaluations"] = log.offline_evaluations;
  doc["cumulative_hv"] = log.cumulative_hv;
  doc["final_front"] = front_to_json(log.final_front);
  doc["timings"] = timings_to_json(log.timings);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

pareto::MetricsReport read_summary_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open summary '" + path.string() + "'");
  const auto doc = nlohmann::json::parse(in);
  return pareto::report_details_from_json(doc.at("metrics").dump());
}

ComparisonTable compare(const std::vector<NamedReport>& reports) {
  if (reports.empty()) throw Error("compare: at least one report required");
  std::vector<ComparisonRow> rows;
  for (const auto& r : reports) rows.push_back({0, r.strategy, r.problem, r.seed, r.report});
  auto key = [](const std::optional<double>& v) {
    return v ? *v : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const ComparisonRow& a, const ComparisonRow& b) {
    const double ga = key(a.report.gd), gb = key(b.report.gd);
    if (ga != gb) return ga < gb;
    const double ia = key(a.report.igd), ib = key(b.report.igd);
    if (ia != ib) return ia < ib;
    if (a.strategy != b.strategy) return a.strategy < b.strategy;
    return a.seed < b.seed;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
  return {std::move(rows)};
}

std::string ComparisonTable::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(6) << "Rank" << std::setw(20) << "Strategy" << std::setw(20)
      << "Problem" << std::setw(6) << "Seed" << std::setw(14) << "GD" << std::setw(14) << "IGD"
      << std::setw(14) << "SP" << std::setw(14) << "MS" << std::setw(14) << "HV"
      << "Pareto Size\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(6) << r.rank << std::setw(20) << r.strategy << std::setw(20)
        << r.problem << std::setw(6) << r.seed << std::setw(14)
        << pareto::format_metric(r.report.gd) << std::setw(14)
        << pareto::format_metric(r.report.igd) << std::setw(14)
        << pareto::format_metric(r.report.spacing) << std::setw(14)
        << pareto::format_metric(r.report.max_spread) << std::setw(14)
        << pareto::format_metric(r.report.hv) << r.report.pareto_size << '\n';
  }
  return out.str();
}

std::string ComparisonTable::to_csv() const {
  auto cell = [](const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string("N/A"); };
  std::string out = "rank,strategy,problem,seed,gd,igd,sp,ms,hv,pareto_size\n";
  for (const auto& r : rows) {
    out += csv::join_row({std::to_string(r.rank), r.strategy, r.problem, std::to_string(r.seed),
                          cell(r.report.gd), cell(r.report.igd), cell(r.report.spacing),
                          cell(r.report.max_spread), cell(r.report.hv),
                          std::to_string(r.report.pareto_size)}) +
           '\n';
  }
  return out;
}

std::string ComparisonTable::to_json() const {
  auto num = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"rank", r.rank},
                   {"strategy", r.strategy},
                   {"problem", r.problem},
                   {"seed", r.seed},
                   {"gd", num(r.report.gd)},
                   {"igd", num(r.report.igd)},
                   {"sp", num(r.report.spacing)},
                   {"ms", num(r.report.max_spread)},
                   {"hv", num(r.report.hv)},
                   {"pareto_size", r.report.pareto_size}});
  }
  return json{{"rows", arr}}.dump(2);
}

}  // namespace invdoe::bench
