#pragma once

// Fixed-budget, fixed-seed benchmarking of the optimization strategies:
// run loops, JSON-lines persistence, scoring and comparison tables.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "invdoe/acquisition.hpp"
#include "invdoe/inverse_regressor.hpp"
#include "invdoe/pareto_metrics.hpp"
#include "invdoe/problem_suite.hpp"

namespace invdoe::bench {

enum class Strategy { Qehvi, Baseline, InverseRegressor, Random };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& text);

struct RunConfig {
  std::string problem = "constrained-biobj";
  Strategy strategy = Strategy::Qehvi;
  std::size_t budget = 60;
  std::size_t init_size = 10;
  std::size_t q = 2;
  std::uint64_t seed = 0;
  std::size_t n_mc = 2048;
  std::size_t starts = 20;
  gp::KernelFamily kernel = gp::KernelFamily::Matern52;
  // inverse-regressor settings
  std::size_t train_size = 500;
  double lambda = 1.0;
  std::size_t epochs = 500;

  void validate() const;
};

struct Trial {
  std::size_t iteration = 0;  // 0 = initialization
  Vector x;
  Vector y;  // raw senses
  bool feasible = true;
  double wall_time_ms = 0.0;
};

struct Timings {
  double fit_ms = 0.0;
  double acquisition_ms = 0.0;
  double inference_ms = 0.0;
  double training_ms = 0.0;
};

struct RunLog {
  RunConfig config;
  std::vector<Trial> trials;
  Vector cumulative_hv;  // after initialization, then after every iteration
  pareto::ParetoFront final_front;  // feasible trials, minimization convention
  Timings timings;
  std::size_t evaluator_calls = 0;
  std::size_t offline_evaluations = 0;  // training-set evaluations (inverse regressor)
};

/// Thrown when a run cannot continue; carries everything logged so far.
class RunFailed : public Error {
 public:
  RunFailed(const std::string& what, RunLog partial) : Error(what), partial_(std::move(partial)) {}
  const RunLog& partial() const { return partial_; }

 private:
  RunLog partial_;
};

/// Receives run events as they happen (append-only logging).
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_start(const RunConfig&) {}
  virtual void on_trial(const Trial&) {}
  virtual void on_iteration(std::size_t /*iteration*/, double /*cumulative_hv*/) {}
  virtual void on_finish(const RunLog&) {}
};

/// Hypervolume of the feasible minimized images that lie inside the
/// problem's reference box.
double feasible_hypervolume(const problems::ProblemSpec& problem, const std::vector<Trial>& trials);

/// One GP per objective on minimization-convention targets.
std::vector<gp::GpModel> fit_objective_models(const std::vector<Vector>& xs,
                                              const std::vector<Vector>& ys_min,
                                              const problems::ConstraintSpec& constraints,
                                              gp::KernelFamily family, std::uint64_t seed);

/// Acquisition context over the given observations (raw senses).
acq::AcquisitionContext make_context(const problems::ProblemSpec& problem,
                                     std::vector<gp::GpModel> models,
                                     const std::vector<Vector>& xs,
                                     const std::vector<Vector>& ys,
                                     const std::vector<bool>& feasible, std::size_t n_mc,
                                     std::uint64_t mc_seed, std::size_t starts = 20);

/// BO loop for qehvi, baseline and random.
RunLog run_bo(const RunConfig& cfg, RunObserver* observer = nullptr);

/// One prediction and one evaluation per target (targets in raw senses).
RunLog run_generative(const problems::ProblemSpec& problem, const inverse::RegressorModel& model,
                      const std::vector<Vector>& targets, const RunConfig& cfg = {},
                      RunObserver* observer = nullptr);

/// `budget` evenly spaced reference-front members, in raw senses.
std::vector<Vector> front_targets(const problems::ProblemSpec& problem, std::size_t count);

/// Dispatches on cfg.strategy; the inverse regressor is trained first on
/// cfg.train_size quasi-random evaluations (counted as offline).
RunLog run(const RunConfig& cfg, RunObserver* observer = nullptr);

pareto::MetricsReport evaluate_run(const RunLog& log, const problems::ProblemSpec& problem);

/// Bitwise comparison ignoring wall-clock fields.
bool same_run(const RunLog& a, const RunLog& b);

// Persistence. File stem: <problem>__<strategy>__seed<S>.

std::string run_stem(const RunConfig& cfg);
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

/// Writes <dir>/<stem>.jsonl as the run progresses.
class JsonlRunWriter : public RunObserver {
 public:
  explicit JsonlRunWriter(std::filesystem::path path);
  const std::filesystem::path& path() const { return path_; }
  void on_start(const RunConfig& cfg) override;
  void on_trial(const Trial& t) override;
  void on_iteration(std::size_t iteration, double hv) override;
  void on_finish(const RunLog& log) override;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

RunLog read_run_log(const std::filesystem::path& jsonl);
void write_run_log(const std::filesystem::path& jsonl, const RunLog& log);

/// <stem>.summary.json: config, metrics, final front, hv trace, timings.
void write_summary(const std::filesystem::path& path, const RunLog& log,
                   const pareto::MetricsReport& report);
pareto::MetricsReport read_summary_metrics(const std::filesystem::path& path);

struct NamedReport {
  std::string strategy;
  std::string problem;
  std::uint64_t seed = 0;
  pareto::MetricsReport report;
};

struct ComparisonRow {
  std::size_t rank = 0;
  std::string strategy;
  std::string problem;
  std::uint64_t seed = 0;
  pareto::MetricsReport report;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  std::string to_text() const;
  std::string to_csv() const;
  std::string to_json() const;
};

/// Ascending by gd (undefined last), then igd, then strategy name.
ComparisonTable compare(const std::vector<NamedReport>& reports);

}  // namespace invdoe::bench
