#pragma once

// Direct property -> formulation regressor: an MLP trained with a
// constraint-aware loss (MSE plus a squared-hinge penalty on the linear
// constraints). Outputs pass through a sigmoid mapped onto the box, so box
// bounds hold by construction.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "invdoe/constraints.hpp"

namespace invdoe::inverse {

enum class Activation { Tanh, Relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& text);

struct TrainConfig {
  std::vector<std::size_t> hidden = {64, 64};
  Activation activation = Activation::Tanh;
  double lambda = 1.0;
  std::size_t epochs = 500;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t plateau_patience = 25;  // epochs without improvement before halving
  double validation_fraction = 0.2;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double violation_rate = 0.0;  // share of validation predictions violating a constraint
};

struct CaftLossReport {
  double mse_term = 0.0;
  double penalty_term = 0.0;
  double total = 0.0;
};

/// mse_term: mean squared error over the D coordinates. penalty_term: sum of
/// max(0, g_j)^2 over the linear constraints (equalities as |a.x - b| - tol).
CaftLossReport caft_loss(std::span<const double> x_pred, std::span<const double> x_true,
                         const problems::ConstraintSpec& constraints, double lambda);

struct Layer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
};

class RegressorModel {
 public:
  std::size_t input_dim() const { return y_mean_.size(); }
  std::size_t output_dim() const { return lower_.size(); }
  std::vector<std::size_t> widths() const;
  Activation activation() const { return activation_; }
  double lambda() const { return lambda_; }
  const std::vector<Layer>& layers() const { return layers_; }
  const std::vector<EpochRecord>& curve() const { return curve_; }
  std::size_t best_epoch() const { return best_epoch_; }

  /// One forward pass; the result always lies inside the box.
  Vector predict(std::span<const double> y_target) const;
  /// Unit-cube coordinates of the prediction.
  Vector predict_unit(std::span<const double> y_target) const;

  std::string to_json() const;
  static RegressorModel from_json(const std::string& text);

 private:
  friend RegressorModel train(const std::vector<Vector>&, const std::vector<Vector>&,
                              const problems::ConstraintSpec&, const TrainConfig&,
                              std::uint64_t);

  Eigen::VectorXd standardize(std::span<const double> y) const;

  std::vector<Layer> layers_;
  Activation activation_ = Activation::Tanh;
  double lambda_ = 1.0;
  Vector y_mean_, y_std_;
  Vector lower_, upper_;
  std::vector<std::string> names_;
  std::vector<EpochRecord> curve_;
  std::size_t best_epoch_ = 0;
};

/// Mini-batch Adam on the mean loss over a seeded 80/20 split; keeps the
/// parameters with the best validation loss. Throws DivergedError on a
/// non-finite loss.
RegressorModel train(const std::vector<Vector>& xs, const std::vector<Vector>& ys,
                     const problems::ConstraintSpec& constraints, const TrainConfig& cfg,
                     std::uint64_t seed);

/// CSV columns: epoch, train, val, violation_rate.
void write_training_curve_csv(const std::filesystem::path& path,
                              const std::vector<EpochRecord>& curve);

}  // namespace invdoe::inverse
