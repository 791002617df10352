#include "invdoe/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "invdoe/pareto_metrics.hpp"
#include "invdoe/sampling.hpp"

namespace invdoe::acq {

namespace {

// Area dominated by y inside the reference box and not already dominated by
// the staircase (sorted by f1 ascending, hence f2 descending).
double hvi_2d(const std::vector<Vector>& stair, const Vector& y, const Vector& r) {
  if (!(y[0] < r[0]) || !(y[1] < r[1])) return 0.0;
  auto it = std::upper_bound(stair.begin(), stair.end(), y[0],
                             [](double v, const Vector& p) { return v < p[0]; });
  double ceiling = it == stair.begin() ? r[1] : std::min(r[1], (it - 1)->at(1));
  double t = y[0];
  double total = 0.0;
  for (; it != stair.end() && ceiling > y[1]; ++it) {
    if ((*it)[0] >= r[0]) break;
    total += ((*it)[0] - t) * (ceiling - y[1]);
    t = (*it)[0];
    ceiling = std::min(ceiling, (*it)[1]);
  }
  if (ceiling > y[1]) total += (r[0] - t) * (ceiling - y[1]);
  return total;
}

void insert_2d(std::vector<Vector>& stair, const Vector& y) {
  std::erase_if(stair, [&](const Vector& p) { return pareto::weakly_dominates(y, p); });
  auto it = std::upper_bound(stair.begin(), stair.end(), y[0],
                             [](double v, const Vector& p) { return v < p[0]; });
  stair.insert(it, y);
}

}  // namespace

QehviEvaluator::QehviEvaluator(const AcquisitionContext& ctx, std::size_t q)
    : ctx_(ctx), q_(q) {
  n_objectives_ = ctx.objective_models.size();
  n_models_ = n_objectives_ + ctx.constraint_models.size();
  if (q == 0) throw Error("qehvi: q must be at least 1");
  if (n_objectives_ < 2) throw DimensionError("qehvi: at least two objective models required");
  if (ctx.n_mc == 0) throw Error("qehvi: n_mc must be at least 1");
  check_same_dimension(ctx.ref_point.size(), n_objectives_, "qehvi reference point");
  for (const auto& f : ctx.current_front) check_same_dimension(f.size(), n_objectives_, "qehvi front");

  // Members outside the reference box add no volume; drop them.
  for (auto& f : pareto::pareto_filter(ctx.current_front)) {
    if (pareto::weakly_dominates(f, ctx.ref_point)) front_.push_back(std::move(f));
  }
  front_hv_ = pareto::hypervolume(front_, ctx.ref_point);
  if (n_objectives_ == 2) {
    for (const auto& f : front_) {
      if (f[0] < ctx.ref_point[0] && f[1] < ctx.ref_point[1]) staircase_.push_back(f);
    }
    std::sort(staircase_.begin(), staircase_.end());
  }
  base_ = sampling::standard_normals(ctx.n_mc * q * n_models_, ctx.mc_seed);
}

double QehviEvaluator::improvement(const std::vector<Vector>& ys,
                                   const std::vector<bool>& keep) const {
  const Vector& r = ctx_.ref_point;
  if (n_objectives_ == 2) {
    if (q_ == 1) return keep[0] ? hvi_2d(staircase_, ys[0], r) : 0.0;
    std::vector<Vector> stair = staircase_;
    double total = 0.0;
    for (std::size_t j = 0; j < q_; ++j) {
      if (!keep[j]) continue;
      const double gain = hvi_2d(stair, ys[j], r);
      if (gain > 0.0) {
        total += gain;
        insert_2d(stair, ys[j]);
      }
    }
    return total;
  }
  std::vector<Vector> pts = front_;
  bool added = false;
  for (std::size_t j = 0; j < q_; ++j) {
    if (keep[j] && pareto::weakly_dominates(ys[j], r)) {
      pts.push_back(ys[j]);
      added = true;
    }
  }
  if (!added) return 0.0;
  return std::max(0.0, pareto::hypervolume(pts, r) - front_hv_);
}

McEstimate QehviEvaluator::estimate(const std::vector<Vector>& batch) const {
  check_same_dimension(batch.size(), q_, "qehvi batch");
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> roots;
  means.reserve(n_models_);
  roots.reserve(n_models_);
  for (std::size_t k = 0; k < n_models_; ++k) {
    const auto& model = k < n_objectives_ ? ctx_.objective_models[k]
                                          : ctx_.constraint_models[k - n_objectives_];
    const gp::JointPosterior jp = model.joint_posterior(batch);
    means.push_back(jp.mean);
    roots.push_back(gp::covariance_root(jp.covariance));
  }
  std::vector<bool> cheap_ok(q_, true);
  if (ctx_.constraints.dim() > 0) {
    for (std::size_t j = 0; j < q_; ++j) cheap_ok[j] = ctx_.constraints.is_feasible(batch[j]);
  }

  const auto qi = static_cast<Eigen::Index>(q_);
  std::vector<Vector> ys(q_, Vector(n_objectives_));
  std::vector<bool> keep(q_);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t s = 0; s < ctx_.n_mc; ++s) {
    const double* z = base_.data() + s * q_ * n_models_;
    std::fill(keep.begin(), keep.end(), true);
    for (std::size_t k = 0; k < n_models_; ++k) {
      for (Eigen::Index j = 0; j < qi; ++j) {
        double v = means[k](j);
        for (Eigen::Index l = 0; l < qi; ++l) {
          v += roots[k](j, l) * z[static_cast<std::size_t>(l) * n_models_ + k];
        }
        const auto ju = static_cast<std::size_t>(j);
        if (k < n_objectives_) {
          ys[ju][k] = v;
        } else if (v > 0.0) {
          keep[ju] = false;
        }
      }
    }
    for (std::size_t j = 0; j < q_; ++j) keep[j] = keep[j] && cheap_ok[j];
    const double gain = improvement(ys, keep);
    sum += gain;
    sum_sq += gain * gain;
  }
  const double n = static_cast<double>(ctx_.n_mc);
  McEstimate est;
  est.value = sum / n;
  if (ctx_.n_mc > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.value * est.value) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

double qehvi_value(const AcquisitionContext& ctx, const std::vector<Vector>& batch) {
  return QehviEvaluator(ctx, batch.size())(batch);
}

MultistartResult multistart_maximize(
    const std::function<double(const std::vector<Vector>&)>& objective,
    const problems::ConstraintSpec& constraints, std::size_t q, std::uint64_t seed,
    const MultistartConfig& cfg) {
  if (q == 0) throw Error("acquisition: q must be at least 1");
  const problems::ConstraintSpec unit = constraints.normalized();
  const std::size_t dim = constraints.dim();
  const std::size_t starts = std::max<std::size_t>(cfg.starts, 1);
  const auto initial = unit.sample_feasible(starts * q, derive_seed(seed, 0xA1));

  auto value_at = [&](const std::vector<Vector>& u) {
    std::vector<Vector> x;
    x.reserve(u.size());
    for (const auto& p : u) x.push_back(constraints.from_unit(p));
    const double v = objective(x);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };

  MultistartResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<Vector> best_unit;
  for (std::size_t s = 0; s < starts; ++s) {
    std::vector<Vector> u(initial.begin() + static_cast<std::ptrdiff_t>(s * q),
                          initial.begin() + static_cast<std::ptrdiff_t>((s + 1) * q));
    double f = value_at(u);
    double alpha = cfg.initial_step;
    Vector grad(q * dim);
    bool need_grad = true;
    for (std::size_t step = 0; step < cfg.max_steps; ++step) {
      if (need_grad) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
          for (std::size_t d = 0; d < dim; ++d) {
            auto probe = u;
            probe[j][d] = u[j][d] + cfg.fd_step;
            const double up = value_at(probe);
            probe[j][d] = u[j][d] - cfg.fd_step;
            const double down = value_at(probe);
            double g = (up - down) / (2.0 * cfg.fd_step);
            if (!std::isfinite(g)) g = 0.0;
            grad[j * dim + d] = g;
            norm2 += g * g;
          }
        }
        if (norm2 == 0.0) break;
        const double norm = std::sqrt(norm2);
        for (double& g : grad) g /= norm;
        need_grad = false;
      }
      std::vector<Vector> trial = u;
      for (std::size_t j = 0; j < q; ++j) {
        for (std::size_t d = 0; d < dim; ++d) trial[j][d] += alpha * grad[j * dim + d];
        trial[j] = unit.project(trial[j]);
      }
      const double ft = value_at(trial);
      if (ft > f) {
        u = std::move(trial);
        f = ft;
        alpha = std::min(2.0 * alpha, cfg.max_step);
        need_grad = true;
      } else {
        alpha *= 0.5;
        if (alpha < cfg.step_tolerance) break;
      }
    }
    if (f > best.value || best_unit.empty()) {
      best.value = f;
      best.start_index = s;
      best_unit = u;
    }
  }
  best.points.reserve(q);
  for (const auto& p : best_unit) best.points.push_back(constraints.from_unit(p));
  return best;
}

CandidateBatch optimize_qehvi(const AcquisitionContext& ctx, std::size_t q, std::uint64_t seed) {
  const QehviEvaluator evaluator(ctx, q);
  MultistartConfig cfg;
  cfg.starts = ctx.starts;
  cfg.max_steps = ctx.max_steps;
  const auto found = multistart_maximize(
      [&](const std::vector<Vector>& batch) { return evaluator(batch); }, ctx.constraints, q,
      seed, cfg);
  const McEstimate est = evaluator.estimate(found.points);
  return {found.points, q, est.value, est.std_error};
}

double expected_improvement(double mean, double sd, double incumbent) {
  const double gap = mean - incumbent;
  if (!(sd > 0.0)) return std::max(0.0, gap);
  const double z = gap / sd;
  return std::max(0.0, gap * sampling::normal_cdf(z) + sd * sampling::normal_pdf(z));
}

namespace {

constexpr double kLogFloor = -1e300;

// Mills ratio Phi(-x) / phi(x) for x >= 5 by its continued fraction.
double mills(double x) {
  double t = x;
  for (int k = 100; k >= 1; --k) t = x + k / t;
  return 1.0 / t;
}

double log_pdf(double z) { return -0.5 * z * z - 0.5 * std::log(2.0 * M_PI); }

// log(phi(z) + z Phi(z)), computed through the Mills ratio below z = -5
// where the direct form cancels.
double log_h(double z) {
  if (z > -5.0) {
    return std::log(sampling::normal_pdf(z) + z * sampling::normal_cdf(z));
  }
  return log_pdf(z) + std::log1p(z * mills(-z));
}

double log_normal_cdf(double z) {
  if (z > -5.0) return std::log(sampling::normal_cdf(z));
  return log_pdf(z) + std::log(mills(-z));
}

}  // namespace

double log_expected_improvement(double mean, double sd, double incumbent) {
  const double gap = mean - incumbent;
  if (!(sd > 0.0)) return gap > 0.0 ? std::log(gap) : kLogFloor;
  return std::log(sd) + log_h(gap / sd);
}

double log_probability_of_feasibility(const std::vector<gp::GpModel>& constraint_models,
                                      std::span<const double> x) {
  double lp = 0.0;
  for (const auto& model : constraint_models) {
    const gp::Posterior post = model.posterior(x);
    const double sd = std::sqrt(post.variance);
    if (sd > 0.0) {
      lp += log_normal_cdf(-post.mean / sd);
    } else if (post.mean > 0.0) {
      return kLogFloor;
    }
  }
  return lp;
}

double probability_of_feasibility(const std::vector<gp::GpModel>& constraint_models,
                                  std::span<const double> x) {
  double p = 1.0;
  for (const auto& model : constraint_models) {
    const gp::Posterior post = model.posterior(x);
    const double sd = std::sqrt(post.variance);
    if (sd > 0.0) {
      p *= sampling::normal_cdf(-post.mean / sd);
    } else if (post.mean > 0.0) {
      return 0.0;
    }
  }
  return p;
}

namespace {

struct TargetScore {
  double mean;
  double sd;
  double distance;
};

// s(x) = -|| (mu(x) - t) / scale ||, with a delta-method standard deviation.
TargetScore target_score(const AcquisitionContext& ctx, const Vector& target,
                         std::span<const double> x) {
  const std::size_t m_count = ctx.objective_models.size();
  Vector dev(m_count), var(m_count);
  double dist2 = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) {
    const auto& model = ctx.objective_models[m];
    const double scale = model.normalization().target_std;
    const gp::Posterior p = model.posterior(x);
    dev[m] = (p.mean - target[m]) / scale;
    var[m] = p.variance / (scale * scale);
    dist2 += dev[m] * dev[m];
  }
  const double dist = std::sqrt(dist2);
  double s_var = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) {
    s_var += dist > 0.0 ? dev[m] * dev[m] / dist2 * var[m] : var[m] / static_cast<double>(m_count);
  }
  return {-dist, std::sqrt(s_var), dist};
}

}  // namespace

CandidateBatch baseline_suggest(const AcquisitionContext& ctx, const Vector& target,
                                std::uint64_t seed) {
  if (ctx.objective_models.empty()) throw Error("baseline: no objective models");
  check_same_dimension(target.size(), ctx.objective_models.size(), "baseline target");

  std::vector<Vector> observed = ctx.observed_inputs;
  if (observed.empty()) observed = ctx.objective_models.front().raw_inputs();
  double incumbent = -std::numeric_limits<double>::infinity();
  const Vector* best_input = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const auto& x : observed) {
    const TargetScore sc = target_score(ctx, target, x);
    incumbent = std::max(incumbent, sc.mean);
    if (sc.distance < best_distance) {
      best_distance = sc.distance;
      best_input = &x;
    }
  }

  // Maximized on the log scale: far from the incumbent plain EI underflows
  // to a flat zero that gives the ascent nothing to follow.
  auto log_acquisition = [&](std::span<const double> x) {
    const TargetScore sc = target_score(ctx, target, x);
    double v = log_expected_improvement(sc.mean, sc.sd, incumbent);
    if (!ctx.constraint_models.empty()) v += log_probability_of_feasibility(ctx.constraint_models, x);
    return std::max(v, kLogFloor);
  };
  auto acquisition = [&](std::span<const double> x) { return std::exp(log_acquisition(x)); };

  // An observed input already matching the target exactly cannot be improved on.
  if (best_input && best_distance <= 1e-6 && ctx.constraints.is_feasible(*best_input)) {
    return {{*best_input}, 1, acquisition(*best_input), 0.0};
  }

  MultistartConfig cfg;
  cfg.starts = ctx.starts;
  cfg.max_steps = ctx.max_steps;
  const auto found = multistart_maximize(
      [&](const std::vector<Vector>& batch) { return log_acquisition(batch.front()); },
      ctx.constraints, 1, seed, cfg);
  return {found.points, 1, std::exp(found.value), 0.0};
}

}  // namespace invdoe::acq
