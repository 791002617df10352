// bench: command-line front end for runs, scoring, comparison, inverse
// regressor training, reference fronts and the suggestion service.

#include <glob.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "invdoe/bench_harness.hpp"
#include "invdoe/http_service.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace invdoe;

namespace {

int fail(const std::string& kind, const std::string& message, int code = 1) {
  nlohmann::ordered_json err{{"status", "error"}, {"error", kind}, {"message", message}};
  std::cerr << err.dump() << '\n';
  return code;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<fs::path> expand(const std::vector<std::string>& patterns) {
  std::vector<fs::path> out;
  for (const auto& pattern : patterns) {
    glob_t g{};
    if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

fs::path summary_path_for(const fs::path& jsonl) {
  fs::path p = jsonl;
  p.replace_extension(".summary.json");
  return p;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

service::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained multi-objective inverse-design benchmarking"};
  app.require_subcommand(1);

  // run
  bench::RunConfig run_cfg;
  std::string run_strategy = "qehvi", run_kernel = "matern52";
  fs::path run_out = "runs";
  auto* run = app.add_subcommand("run", "Run one strategy on one problem");
  run->add_option("--problem", run_cfg.problem, "Problem id")->capture_default_str();
  run->add_option("--strategy", run_strategy, "qehvi | baseline | inverse-regressor | random")
      ->capture_default_str();
  run->add_option("--budget", run_cfg.budget)->capture_default_str();
  run->add_option("--init", run_cfg.init_size, "Initial design size")->capture_default_str();
  run->add_option("--q", run_cfg.q, "Batch size")->capture_default_str();
  run->add_option("--seed", run_cfg.seed)->capture_default_str();
  run->add_option("--n-mc", run_cfg.n_mc, "Monte Carlo samples")->capture_default_str();
  run->add_option("--starts", run_cfg.starts, "Acquisition restarts")->capture_default_str();
  run->add_option("--kernel", run_kernel, "matern52 | se")->capture_default_str();
  run->add_option("--train-size", run_cfg.train_size)->capture_default_str();
  run->add_option("--lambda", run_cfg.lambda)->capture_default_str();
  run->add_option("--epochs", run_cfg.epochs)->capture_default_str();
  run->add_option("--out-dir", run_out, "Directory for <stem>.jsonl and <stem>.summary.json")
      ->capture_default_str();

  // metrics
  fs::path metrics_run;
  auto* metrics = app.add_subcommand("metrics", "Re-score a persisted run log");
  metrics->add_option("--run", metrics_run, "Run .jsonl file")->required();

  // compare
  std::vector<std::string> compare_runs;
  fs::path compare_out;
  auto* compare = app.add_subcommand("compare", "Rank runs by GD");
  compare->add_option("--runs", compare_runs, "Glob(s) of .jsonl or .summary.json files")
      ->required();
  compare->add_option("--out", compare_out, "table.csv or table.json");

  // train-inverse
  std::string ti_problem = "resin-demo", ti_activation = "tanh";
  fs::path ti_dataset, ti_out = "model.json", ti_curve;
  inverse::TrainConfig ti_cfg;
  std::uint64_t ti_seed = 0;
  std::size_t ti_train_size = 500;
  auto* train = app.add_subcommand("train-inverse", "Train the property-to-formulation regressor");
  train->add_option("--problem", ti_problem, "Problem whose schema and constraints apply")
      ->capture_default_str();
  train->add_option("--dataset", ti_dataset,
                    "CSV with the problem's input and output columns; "
                    "omitted: simulate --train-size pairs");
  train->add_option("--train-size", ti_train_size)->capture_default_str();
  train->add_option("--lambda", ti_cfg.lambda)->capture_default_str();
  train->add_option("--epochs", ti_cfg.epochs)->capture_default_str();
  train->add_option("--lr", ti_cfg.learning_rate)->capture_default_str();
  train->add_option("--hidden", ti_cfg.hidden, "Hidden layer widths");
  train->add_option("--activation", ti_activation, "tanh | relu")->capture_default_str();
  train->add_option("--seed", ti_seed)->capture_default_str();
  train->add_option("--out", ti_out)->capture_default_str();
  train->add_option("--curve", ti_curve, "Training curve CSV");

  // front
  std::string front_problem = "constrained-biobj";
  std::size_t front_resolution = 500;
  fs::path front_out = "front.csv";
  auto* front = app.add_subcommand("front", "Write a reference front");
  front->add_option("--problem", front_problem)->capture_default_str();
  front->add_option("--resolution", front_resolution)->capture_default_str();
  front->add_option("--out", front_out)->capture_default_str();

  // serve
  service::ServiceConfig svc;
  std::string svc_strategy = "baseline", svc_host = "0.0.0.0";
  int svc_port = 5000;
  std::string svc_log_dir, svc_snapshot;
  auto* serve = app.add_subcommand("serve", "Start the suggestion service");
  serve->add_option("--port", svc_port)->capture_default_str();
  serve->add_option("--host", svc_host)->capture_default_str();
  serve->add_option("--problem", svc.problem)->capture_default_str();
  serve->add_option("--strategy", svc_strategy, "baseline | qehvi")->capture_default_str();
  serve->add_option("--seed", svc.seed)->capture_default_str();
  serve->add_option("--n-mc", svc.n_mc)->capture_default_str();
  serve->add_option("--starts", svc.starts)->capture_default_str();
  serve->add_option("--log-dir", svc_log_dir, "Append observations here and replay them at startup");
  serve->add_option("--snapshot,--replay", svc_snapshot, "Session snapshot to preload");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*run) {
      run_cfg.strategy = bench::strategy_from_string(run_strategy);
      run_cfg.kernel = gp::kernel_family_from_string(run_kernel);
      run_cfg.validate();
      const fs::path jsonl = run_out / (bench::run_stem(run_cfg) + ".jsonl");
      fs::create_directories(run_out);
      bench::RunLog log;
      {
        bench::JsonlRunWriter writer(jsonl);
        try {
          log = bench::run(run_cfg, &writer);
        } catch (const bench::RunFailed& e) {
          writer.on_finish(e.partial());
          throw;
        }
      }
      const auto problem = problems::make_problem(run_cfg.problem, 0);
      const auto report = bench::evaluate_run(log, problem);
      bench::write_summary(summary_path_for(jsonl), log, report);
      std::cout << pareto::report_to_json(report) << '\n';
      std::cerr << "wrote " << jsonl.string() << '\n';
      return 0;
    }
    if (*metrics) {
      const bench::RunLog log = bench::read_run_log(metrics_run);
      const auto problem = problems::make_problem(log.config.problem, 0);
      const auto report = bench::evaluate_run(log, problem);
      const fs::path summary = summary_path_for(metrics_run);
      if (fs::exists(summary)) {
        const auto stored = bench::read_summary_metrics(summary);
        if (pareto::report_details_to_json(stored) != pareto::report_details_to_json(report)) {
          return fail("replay_mismatch", "re-scored metrics differ from " + summary.string(), 3);
        }
      }
      std::cout << pareto::report_to_json(report) << '\n';
      return 0;
    }
    if (*compare) {
      const auto files = expand(compare_runs);
      if (files.empty()) throw NotFoundError("no run files match");
      std::vector<bench::NamedReport> reports;
      for (const auto& f : files) {
        const std::string name = f.filename().string();
        if (ends_with(name, ".summary.json")) {
          const auto cfg = bench::config_from_json(
              nlohmann::json::parse(read_text(f)).at("config").dump());
          reports.push_back({bench::to_string(cfg.strategy), cfg.problem, cfg.seed,
                             bench::read_summary_metrics(f)});
        } else if (ends_with(name, ".jsonl")) {
          // Prefer the stored summary when both are matched.
          if (std::find(files.begin(), files.end(), summary_path_for(f)) != files.end()) continue;
          const auto log = bench::read_run_log(f);
          const auto problem = problems::make_problem(log.config.problem, 0);
          reports.push_back({bench::to_string(log.config.strategy), log.config.problem,
                             log.config.seed, bench::evaluate_run(log, problem)});
        }
      }
      if (reports.empty()) throw NotFoundError("no .jsonl or .summary.json files match");
      const auto table = bench::compare(reports);
      std::cout << table.to_text();
      if (!compare_out.empty()) {
        const std::string ext = compare_out.extension().string();
        if (ext == ".csv") {
          write_text(compare_out, table.to_csv());
        } else if (ext == ".json") {
          write_text(compare_out, table.to_json());
        } else {
          throw Error("--out must end in .csv or .json");
        }
      }
      return 0;
    }
    if (*train) {
      ti_cfg.activation = inverse::activation_from_string(ti_activation);
      const auto problem = problems::make_problem(ti_problem, 0);
      std::vector<Vector> xs, ys;
      if (!ti_dataset.empty()) {
        problems::Schema schema;
        schema.inputs = problem.constraints.names();
        schema.outputs = problem.objective_names;
        schema.senses = problem.senses;
        problems::LoadReport lr;
        const auto data = problems::load_dataset(ti_dataset, schema, &lr);
        if (lr.dropped > 0) std::cerr << "dropped " << lr.dropped << " invalid rows\n";
        xs = data.x;
        ys = data.y;
      } else {
        xs = problem.constraints.sample_feasible(ti_train_size, derive_seed(ti_seed, 0x66));
        for (const auto& x : xs) ys.push_back(problem.evaluate(x).y);
      }
      const auto model = inverse::train(xs, ys, problem.constraints, ti_cfg, ti_seed);
      write_text(ti_out, model.to_json());
      if (!ti_curve.empty()) inverse::write_training_curve_csv(ti_curve, model.curve());
      const auto& best = model.curve().at(model.best_epoch());
      nlohmann::ordered_json out{{"status", "success"},
                                 {"model", ti_out.string()},
                                 {"samples", xs.size()},
                                 {"best_epoch", model.best_epoch()},
                                 {"validation_loss", best.validation_loss},
                                 {"violation_rate", best.violation_rate}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (*front) {
      const auto problem = problems::make_problem(front_problem, 0);
      const auto ref = problems::true_front(problem, front_resolution);
      pareto::ParetoFront members;
      for (const auto& f : ref) members.push_back({{}, f});
      pareto::write_front_csv(front_out, members, false);
      std::cerr << "wrote " << ref.size() << " points to " << front_out.string() << '\n';
      return 0;
    }
    if (*serve) {
      svc.strategy = bench::strategy_from_string(svc_strategy);
      if (!svc_log_dir.empty()) svc.log_dir = svc_log_dir;
      if (!svc_snapshot.empty()) svc.snapshot = svc_snapshot;
      service::Service server(svc);
      g_service = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving " << svc.problem << " on " << svc_host << ':' << svc_port << '\n';
      if (!server.listen(svc_host, svc_port)) {
        g_service = nullptr;
        return fail("bind", "cannot bind " + svc_host + ":" + std::to_string(svc_port));
      }
      g_service = nullptr;
      return 0;
    }
  } catch (const NotFoundError& e) {
    return fail("not_found", e.what());
  } catch (const DimensionError& e) {
    return fail("dimension", e.what());
  } catch (const InfeasibleRegionError& e) {
    return fail("infeasible_region", e.what());
  } catch (const DivergedError& e) {
    return fail("diverged", e.what());
  } catch (const std::exception& e) {
    return fail("error", e.what());
  }
  return 0;
}
