#pragma once

// Batch expected hypervolume improvement (Monte Carlo, frozen base samples),
// its multi-start maximizer, the target-matching EI baseline and probability
// of feasibility.

#include <cstdint>
#include <functional>
#include <vector>

#include "invdoe/constraints.hpp"
#include "invdoe/gp_surrogate.hpp"

namespace invdoe::acq {

struct AcquisitionContext {
  // Objective models predict minimization-convention values.
  std::vector<gp::GpModel> objective_models;
  // Modeled expensive constraints, g(x) <= 0 feasible.
  std::vector<gp::GpModel> constraint_models;
  std::vector<Vector> current_front;  // minimization convention
  Vector ref_point;
  problems::ConstraintSpec constraints;  // bounds and cheap constraints, raw units
  // Feasible inputs observed so far (baseline incumbent); empty means the
  // training inputs of the first objective model.
  std::vector<Vector> observed_inputs;
  std::size_t n_mc = 2048;
  std::uint64_t mc_seed = 0;
  std::size_t starts = 20;
  std::size_t max_steps = 200;
};

struct CandidateBatch {
  std::vector<Vector> points;  // raw units
  std::size_t q = 0;
  double acquisition_value = 0.0;
  double std_error = 0.0;  // MC standard error; 0 for the baseline
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// qEHVI with the base-sample block fixed at construction, so repeated
/// evaluations at the same batch agree exactly.
class QehviEvaluator {
 public:
  QehviEvaluator(const AcquisitionContext& ctx, std::size_t q);

  std::size_t q() const { return q_; }
  McEstimate estimate(const std::vector<Vector>& batch) const;
  double operator()(const std::vector<Vector>& batch) const { return estimate(batch).value; }

 private:
  double improvement(const std::vector<Vector>& ys, const std::vector<bool>& keep) const;

  const AcquisitionContext& ctx_;
  std::size_t q_;
  std::size_t n_objectives_;
  std::size_t n_models_;
  Vector base_;                 // n_mc x q x (M + C), row-major
  std::vector<Vector> front_;   // members strictly inside the reference box
  std::vector<Vector> staircase_;  // 2-D fast path: sorted by f1
  double front_hv_ = 0.0;
};

double qehvi_value(const AcquisitionContext& ctx, const std::vector<Vector>& batch);

/// Multi-start finite-difference ascent over batches of q points.
CandidateBatch optimize_qehvi(const AcquisitionContext& ctx, std::size_t q,
                              std::uint64_t seed);

/// Target-distance expected improvement, q = 1. `target` is in the same
/// convention as the objective models.
CandidateBatch baseline_suggest(const AcquisitionContext& ctx, const Vector& target,
                                std::uint64_t seed);

double probability_of_feasibility(const std::vector<gp::GpModel>& constraint_models,
                                  std::span<const double> x);

/// Expected improvement of a Gaussian N(mean, sd^2) over `incumbent` (maximization).
double expected_improvement(double mean, double sd, double incumbent);
/// log of the same, accurate where the plain value underflows.
double log_expected_improvement(double mean, double sd, double incumbent);
double log_probability_of_feasibility(const std::vector<gp::GpModel>& constraint_models,
                                      std::span<const double> x);

struct MultistartConfig {
  std::size_t starts = 20;
  std::size_t max_steps = 200;
  double initial_step = 0.1;
  double max_step = 0.5;
  double step_tolerance = 1e-6;
  double fd_step = 1e-4;
};

struct MultistartResult {
  std::vector<Vector> points;  // raw units
  double value = 0.0;
  std::size_t start_index = 0;
};

/// Maximizes `objective` over batches of q feasible points. Starts are
/// quasi-random feasible batches; each is refined by normalized-coordinate
/// gradient ascent (central differences) with step doubling/halving and
/// projection onto the cheap constraints after every step. Ties resolve to
/// the lowest start index.
MultistartResult multistart_maximize(
    const std::function<double(const std::vector<Vector>&)>& objective,
    const problems::ConstraintSpec& constraints, std::size_t q, std::uint64_t seed,
    const MultistartConfig& cfg = {});

}  // namespace invdoe::acq
