#pragma once

// Two independent 1-D GPs with three training points each, fixed
// hyperparameters; the observed front and a candidate inside its gaps.

#include "invdoe/acquisition.hpp"

namespace tiny {

inline invdoe::gp::GpModel model(double y0, double y1, double y2) {
  using namespace invdoe::gp;
  Eigen::MatrixXd x(3, 1);
  x << 0.1, 0.5, 0.9;
  Eigen::VectorXd y(3);
  y << y0, y1, y2;
  KernelConfig k;
  k.lengthscales = {0.25};
  k.signal_variance = 0.02;
  k.noise_variance = 1e-6;
  return GpModel::condition(x, y, k, 0.5, Normalization::identity(1));
}

inline invdoe::acq::AcquisitionContext context(std::size_t n_mc, std::uint64_t seed) {
  invdoe::acq::AcquisitionContext ctx;
  ctx.objective_models = {model(0.2, 0.5, 0.8), model(0.8, 0.5, 0.2)};
  ctx.current_front = {{0.2, 0.8}, {0.5, 0.5}, {0.8, 0.2}};
  ctx.ref_point = {1.0, 1.0};
  ctx.constraints = invdoe::problems::ConstraintSpec({0.0}, {1.0});
  ctx.n_mc = n_mc;
  ctx.mc_seed = seed;
  return ctx;
}

inline const invdoe::Vector candidate{0.3};

}  // namespace tiny
