#pragma once

// Benchmark problems: synthetic constrained multi-objective problems with
// known fronts, dataset-backed problems with a frozen GP-mean simulator, and
// CSV dataset ingestion.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invdoe/constraints.hpp"
#include "invdoe/gp_surrogate.hpp"
#include "invdoe/pareto_metrics.hpp"

namespace invdoe::problems {

enum class Mode { Optimize, TargetMatch };

std::string to_string(Mode mode);

/// Objective values in each objective's own sense (not negated).
struct Evaluation {
  Vector y;
  bool feasible = true;
};

using Evaluator = std::function<Evaluation(std::span<const double>)>;

struct ProblemSpec {
  std::string id;
  std::size_t dim = 0;
  std::size_t n_objectives = 0;
  std::vector<std::string> objective_names;
  std::vector<Sense> senses;
  ConstraintSpec constraints;
  Evaluator evaluator;
  pareto::ReferenceFront reference_front;  // minimization convention
  Vector reference_point;                  // minimization convention
  Mode mode = Mode::Optimize;
  Vector target;  // target-match mode: property targets in raw senses
  bool analytic_front = false;
  // Analytic front sampled at a given resolution, when one is known.
  std::function<pareto::ReferenceFront(std::size_t)> analytic;
  std::string dataset_hash;
  std::uint64_t seed = 0;
  // Rows the ground truth was fitted on (dataset problems), raw senses.
  std::vector<Vector> prior_x;
  std::vector<Vector> prior_y;
  std::shared_ptr<const std::vector<gp::GpModel>> ground_truth;

  Evaluation evaluate(std::span<const double> x) const;
  /// Objective vector in the minimization convention.
  Vector minimized(std::span<const double> y) const;
};

/// Ids accepted by make_problem().
std::vector<std::string> registered_problems();

/// biobj-quadratic, constrained-biobj or mixture-triobj.
ProblemSpec make_synthetic(const std::string& id, std::uint64_t seed = 0);

/// Any registered id, including the dataset-backed resin-demo problem.
ProblemSpec make_problem(const std::string& id, std::uint64_t seed = 0);

/// Reference front sampled at `resolution` points: the analytic
/// parameterization where known, else the Pareto filter of `resolution`
/// quasi-random feasible evaluations. Minimization convention.
pareto::ReferenceFront true_front(const ProblemSpec& problem, std::size_t resolution);

/// Rewrites objectives as |f_m(x) - target_m|, all minimized.
ProblemSpec with_target(const ProblemSpec& problem, const Vector& target,
                        std::size_t resolution = 4096);

struct Schema {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<std::string> input_units;
  std::vector<std::string> output_units;
  std::vector<Sense> senses;  // per output; empty means all minimized
};

struct Dataset {
  Schema schema;
  std::vector<Vector> x;
  std::vector<Vector> y;

  std::size_t size() const { return x.size(); }
  std::size_t dim() const { return schema.inputs.size(); }
  std::size_t n_outputs() const { return schema.outputs.size(); }
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t dropped = 0;
  std::vector<std::size_t> dropped_lines;
};

/// Reads the schema's columns from a CSV with a header row. Header names must
/// match exactly (whitespace included). Rows with unparsable or non-finite
/// values are dropped and counted.
Dataset load_dataset(const std::filesystem::path& path, const Schema& schema,
                     LoadReport* report = nullptr);
Dataset parse_dataset(const std::string& csv_text, const Schema& schema,
                      LoadReport* report = nullptr);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);

/// SHA-256 (hex) of the schema and rows in a canonical text form.
std::string dataset_hash(const Dataset& dataset);

struct GroundTruthOptions {
  std::string id = "dataset";
  // Search space; defaults to the observed input range.
  std::optional<ConstraintSpec> constraints;
  std::size_t front_resolution = 4096;
  gp::KernelFamily family = gp::KernelFamily::Matern52;
};

/// Freezes one GP per output on the full dataset; the posterior means become
/// the deterministic evaluator.
ProblemSpec fit_ground_truth(const Dataset& dataset, std::uint64_t seed,
                             const GroundTruthOptions& options = {});

/// Schema and 64-row synthetic dataset for the resin-style demo problem.
Schema resin_demo_schema();
ConstraintSpec resin_demo_constraints();
Dataset resin_demo_dataset();

/// ProblemSpec minus the evaluator closure and models.
std::string problem_to_json(const ProblemSpec& problem);

}  // namespace invdoe::problems
