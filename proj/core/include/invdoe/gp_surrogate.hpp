#pragma once

// Exact Gaussian-process regression for one scalar output: Matérn-5/2 or
// squared-exponential ARD kernel, constant mean, inputs scaled to the unit
// cube and targets standardized. Models are immutable once built.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invdoe/common.hpp"

namespace invdoe::gp {

enum class KernelFamily { Matern52, SquaredExponential };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& text);

struct KernelConfig {
  KernelFamily family = KernelFamily::Matern52;
  Vector lengthscales;  // unit-cube input units, one per dimension
  double signal_variance = 1.0;
  double noise_variance = 1e-6;

  void validate(std::size_t dim) const;
};

/// Maps raw inputs to the unit cube and raw targets to standard units.
struct Normalization {
  Vector lower;
  Vector upper;
  double target_mean = 0.0;
  double target_std = 1.0;

  static Normalization identity(std::size_t dim);
  Vector to_unit(std::span<const double> x) const;
  Vector from_unit(std::span<const double> u) const;
  bool contains(std::span<const double> x) const;
};

/// One evaluated trial in raw units.
struct Observation {
  Vector x;
  Vector y;
  bool feasible = true;
  Vector constraint_values;  // modeled constraints, g(x) <= 0 is feasible
};

struct FitConfig {
  KernelFamily family = KernelFamily::Matern52;
  std::size_t restarts = 8;
  std::size_t max_iterations = 200;
  std::uint64_t seed = 0;
  double noise_floor = 1e-8;
  double min_lengthscale = 1e-3;
  double max_lengthscale = 1e3;
  double min_variance = 1e-8;
  double max_variance = 1e3;
  double step_tolerance = 1e-3;  // log-space; a start stops when all steps fall below
  // Declared input bounds; when absent the observed range is used.
  std::optional<Vector> lower;
  std::optional<Vector> upper;
};

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
  bool extrapolated = false;
};

struct JointPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

class GpModel {
 public:
  /// Conditions a GP with fixed hyperparameters. `unit_inputs` are rows in
  /// the unit cube, `std_targets` in standardized units. Jitter escalates
  /// from `min_jitter` (then 1e-6 up to 1e-2) if the factorization fails.
  static GpModel condition(Eigen::MatrixXd unit_inputs, Eigen::VectorXd std_targets,
                           KernelConfig kernel, double mean_constant,
                           Normalization normalization, double min_jitter = 0.0);

  const KernelConfig& kernel() const { return kernel_; }
  double mean_constant() const { return mean_constant_; }
  const Normalization& normalization() const { return normalization_; }
  double jitter() const { return jitter_; }
  std::size_t size() const { return static_cast<std::size_t>(inputs_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(inputs_.cols()); }
  const Eigen::MatrixXd& unit_inputs() const { return inputs_; }
  const Eigen::VectorXd& standardized_targets() const { return targets_; }
  std::vector<Vector> raw_inputs() const;
  Eigen::MatrixXd factor() const;

  /// Latent posterior in raw target units.
  Posterior posterior(std::span<const double> x) const;
  /// Latent posterior in standardized units.
  Posterior posterior_standardized(std::span<const double> x) const;
  /// Gradient of the raw-unit posterior mean with respect to raw inputs.
  Vector mean_gradient(std::span<const double> x) const;
  /// Joint latent posterior over several raw inputs, raw target units.
  JointPosterior joint_posterior(const std::vector<Vector>& xs) const;

  /// Log marginal likelihood of the raw targets.
  double log_marginal_likelihood() const;
  /// Same quantity in standardized units (the fit objective).
  double standardized_log_marginal_likelihood() const;

  std::string to_json() const;
  static GpModel from_json(const std::string& text);

 private:
  GpModel() = default;

  Eigen::VectorXd cross_kernel(std::span<const double> unit_x) const;
  double kernel_value(std::span<const double> a, std::span<const double> b) const;

  KernelConfig kernel_;
  double mean_constant_ = 0.0;
  Normalization normalization_;
  double jitter_ = 0.0;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Eigen::MatrixXd chol_;   // lower factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_;  // (K + ...)^-1 (y - m)
};

/// Kernel evaluation on unit-cube inputs.
double kernel(const KernelConfig& cfg, std::span<const double> a, std::span<const double> b);

/// Fits a GP to output `objective_index` of `observations` by maximizing the
/// log marginal likelihood with seeded multi-start coordinate search in log
/// space. The constant mean is profiled out in closed form at every step.
GpModel fit(const std::vector<Observation>& observations, std::size_t objective_index,
            const FitConfig& cfg);

/// Same as fit() but on explicit (x, y) pairs.
GpModel fit(const std::vector<Vector>& xs, const Vector& ys, const FitConfig& cfg);

/// Joint draws of the latent function at `xs`: n_samples x q, raw units.
Eigen::MatrixXd sample_posterior(const GpModel& model, const std::vector<Vector>& xs,
                                 std::size_t n_samples, std::uint64_t seed);

/// Symmetric square root S with S S^T = cov; eigenvalues below a relative
/// 1e-12 floor are clamped to zero so repeated inputs yield repeated draws.
Eigen::MatrixXd covariance_root(const Eigen::MatrixXd& cov);

double log_marginal_likelihood(const GpModel& model);

}  // namespace invdoe::gp
