#include "invdoe/gp_surrogate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "invdoe/sampling.hpp"
#include "json.hpp"

namespace invdoe::gp {

namespace {

constexpr std::array<double, 6> kJitterLadder = {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
const double kSqrt5 = std::sqrt(5.0);
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double matern52(double r2, double signal) {
  const double r = std::sqrt(r2);
  return signal * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r2) * std::exp(-kSqrt5 * r);
}

double squared_exponential(double r2, double signal) { return signal * std::exp(-0.5 * r2); }

double kernel_from_r2(KernelFamily family, double r2, double signal) {
  return family == KernelFamily::Matern52 ? matern52(r2, signal)
                                          : squared_exponential(r2, signal);
}

// Attempts an LLT of `k` with escalating diagonal jitter. Returns the jitter
// used, or nullopt if every rung failed.
std::optional<double> factorize(const Eigen::MatrixXd& k, double min_jitter,
                                Eigen::MatrixXd& lower) {
  const Eigen::Index n = k.rows();
  std::vector<double> rungs = {min_jitter};
  for (double rung : kJitterLadder) {
    if (rung > min_jitter) rungs.push_back(rung);
  }
  for (double jitter : rungs) {
    Eigen::LLT<Eigen::MatrixXd> llt(k + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      lower = llt.matrixL();
      if (lower.allFinite() && (lower.diagonal().array() > 0.0).all()) return jitter;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Matern52 ? "matern52" : "squared_exponential";
}

KernelFamily kernel_family_from_string(const std::string& text) {
  if (text == "matern52") return KernelFamily::Matern52;
  if (text == "squared_exponential" || text == "se") return KernelFamily::SquaredExponential;
  throw Error("unknown kernel family '" + text + "'");
}

void KernelConfig::validate(std::size_t dim) const {
  check_same_dimension(lengthscales.size(), dim, "kernel lengthscales");
  for (double l : lengthscales) {
    if (!(l > 0.0)) throw Error("kernel: lengthscales must be positive");
  }
  if (!(signal_variance > 0.0)) throw Error("kernel: signal variance must be positive");
  if (!(noise_variance >= 0.0)) throw Error("kernel: noise variance must be non-negative");
}

Normalization Normalization::identity(std::size_t dim) {
  return {Vector(dim, 0.0), Vector(dim, 1.0), 0.0, 1.0};
}

Vector Normalization::to_unit(std::span<const double> x) const {
  check_same_dimension(x.size(), lower.size(), "normalize input");
  Vector u(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) u[d] = (x[d] - lower[d]) / (upper[d] - lower[d]);
  return u;
}

Vector Normalization::from_unit(std::span<const double> u) const {
  check_same_dimension(u.size(), lower.size(), "denormalize input");
  Vector x(u.size());
  for (std::size_t d = 0; d < u.size(); ++d) x[d] = lower[d] + u[d] * (upper[d] - lower[d]);
  return x;
}

bool Normalization::contains(std::span<const double> x) const {
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double slack = 1e-9 * (upper[d] - lower[d]);
    if (x[d] < lower[d] - slack || x[d] > upper[d] + slack) return false;
  }
  return true;
}

double kernel(const KernelConfig& cfg, std::span<const double> a, std::span<const double> b) {
  double r2 = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double t = (a[d] - b[d]) / cfg.lengthscales[d];
    r2 += t * t;
  }
  return kernel_from_r2(cfg.family, r2, cfg.signal_variance);
}

double GpModel::kernel_value(std::span<const double> a, std::span<const double> b) const {
  return gp::kernel(kernel_, a, b);
}

GpModel GpModel::condition(Eigen::MatrixXd unit_inputs, Eigen::VectorXd std_targets,
                           KernelConfig kernel_cfg, double mean_constant,
                           Normalization normalization, double min_jitter) {
  const auto n = unit_inputs.rows();
  const auto dim = static_cast<std::size_t>(unit_inputs.cols());
  if (n < 1) throw Error("gp: at least one training point required");
  check_same_dimension(static_cast<std::size_t>(std_targets.size()),
                       static_cast<std::size_t>(n), "gp targets");
  kernel_cfg.validate(dim);
  check_same_dimension(normalization.lower.size(), dim, "gp normalization");

  GpModel model;
  model.kernel_ = std::move(kernel_cfg);
  model.mean_constant_ = mean_constant;
  model.normalization_ = std::move(normalization);
  model.inputs_ = std::move(unit_inputs);
  model.targets_ = std::move(std_targets);

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const Eigen::VectorXd a = model.inputs_.row(i), b = model.inputs_.row(j);
      k(i, j) = k(j, i) = model.kernel_value({a.data(), dim}, {b.data(), dim});
    }
  }
  k.diagonal().array() += model.kernel_.noise_variance;
  auto jitter = factorize(k, min_jitter, model.chol_);
  if (!jitter) throw IllConditionedError("ill-conditioned kernel");
  model.jitter_ = *jitter;
  const Eigen::VectorXd centered = model.targets_.array() - mean_constant;
  model.alpha_ = model.chol_.transpose().triangularView<Eigen::Upper>().solve(
      model.chol_.triangularView<Eigen::Lower>().solve(centered));
  return model;
}

std::vector<Vector> GpModel::raw_inputs() const {
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    Vector u(dim());
    for (std::size_t d = 0; d < dim(); ++d) u[d] = inputs_(i, static_cast<Eigen::Index>(d));
    out.push_back(normalization_.from_unit(u));
  }
  return out;
}

Eigen::MatrixXd GpModel::factor() const { return chol_; }

Eigen::VectorXd GpModel::cross_kernel(std::span<const double> unit_x) const {
  const auto n = inputs_.rows();
  Eigen::VectorXd kx(n);
  Vector row(dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim(); ++d) row[d] = inputs_(i, static_cast<Eigen::Index>(d));
    kx(i) = kernel_value(unit_x, row);
  }
  return kx;
}

Posterior GpModel::posterior_standardized(std::span<const double> x) const {
  check_same_dimension(x.size(), dim(), "posterior");
  const Vector u = normalization_.to_unit(x);
  const Eigen::VectorXd kx = cross_kernel(u);
  Posterior p;
  p.mean = mean_constant_ + kx.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
  p.variance = std::max(0.0, kernel_.signal_variance - v.squaredNorm());
  p.extrapolated = !normalization_.contains(x);
  return p;
}

Posterior GpModel::posterior(std::span<const double> x) const {
  Posterior p = posterior_standardized(x);
  const double s = normalization_.target_std;
  p.mean = p.mean * s + normalization_.target_mean;
  p.variance *= s * s;
  return p;
}

Vector GpModel::mean_gradient(std::span<const double> x) const {
  check_same_dimension(x.size(), dim(), "mean_gradient");
  const Vector u = normalization_.to_unit(x);
  const std::size_t d_count = dim();
  Vector grad(d_count, 0.0);
  Vector row(d_count);
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    double r2 = 0.0;
    for (std::size_t d = 0; d < d_count; ++d) {
      row[d] = inputs_(i, static_cast<Eigen::Index>(d));
      const double t = (u[d] - row[d]) / kernel_.lengthscales[d];
      r2 += t * t;
    }
    // dk/du_d = -coef * (u_d - x_id) / l_d^2
    double coef = 0.0;
    if (kernel_.family == KernelFamily::Matern52) {
      const double r = std::sqrt(r2);
      coef = 5.0 / 3.0 * kernel_.signal_variance * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
    } else {
      coef = squared_exponential(r2, kernel_.signal_variance);
    }
    for (std::size_t d = 0; d < d_count; ++d) {
      const double l = kernel_.lengthscales[d];
      grad[d] -= alpha_(i) * coef * (u[d] - row[d]) / (l * l);
    }
  }
  for (std::size_t d = 0; d < d_count; ++d) {
    grad[d] *= normalization_.target_std / (normalization_.upper[d] - normalization_.lower[d]);
  }
  return grad;
}

JointPosterior GpModel::joint_posterior(const std::vector<Vector>& xs) const {
  const auto q = static_cast<Eigen::Index>(xs.size());
  std::vector<Vector> units;
  units.reserve(xs.size());
  Eigen::MatrixXd cross(inputs_.rows(), q);
  for (Eigen::Index j = 0; j < q; ++j) {
    check_same_dimension(xs[static_cast<std::size_t>(j)].size(), dim(), "joint_posterior");
    units.push_back(normalization_.to_unit(xs[static_cast<std::size_t>(j)]));
    cross.col(j) = cross_kernel(units.back());
  }
  JointPosterior jp;
  jp.mean = (cross.transpose() * alpha_).array() + mean_constant_;
  const Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(cross);
  Eigen::MatrixXd prior(q, q);
  for (Eigen::Index a = 0; a < q; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      prior(a, b) = prior(b, a) =
          kernel_value(units[static_cast<std::size_t>(a)], units[static_cast<std::size_t>(b)]);
    }
  }
  jp.covariance = prior - v.transpose() * v;
  const double s = normalization_.target_std;
  jp.mean = jp.mean.array() * s + normalization_.target_mean;
  jp.covariance *= s * s;
  return jp;
}

double GpModel::standardized_log_marginal_likelihood() const {
  const Eigen::VectorXd centered = targets_.array() - mean_constant_;
  const double n = static_cast<double>(targets_.size());
  return -0.5 * centered.dot(alpha_) - chol_.diagonal().array().log().sum() - 0.5 * n * kLog2Pi;
}

double GpModel::log_marginal_likelihood() const {
  return standardized_log_marginal_likelihood() -
         static_cast<double>(targets_.size()) * std::log(normalization_.target_std);
}

double log_marginal_likelihood(const GpModel& model) { return model.log_marginal_likelihood(); }

std::string GpModel::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = "invdoe.gp";
  doc["version"] = 1;
  doc["kernel"] = {{"family", to_string(kernel_.family)},
                   {"lengthscales", kernel_.lengthscales},
                   {"signal_variance", kernel_.signal_variance},
                   {"noise_variance", kernel_.noise_variance}};
  doc["mean_constant"] = mean_constant_;
  doc["jitter"] = jitter_;
  doc["normalization"] = {{"lower", normalization_.lower},
                          {"upper", normalization_.upper},
                          {"target_mean", normalization_.target_mean},
                          {"target_std", normalization_.target_std}};
  auto inputs = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    Vector row(dim());
    for (std::size_t d = 0; d < dim(); ++d) row[d] = inputs_(i, static_cast<Eigen::Index>(d));
    inputs.push_back(row);
  }
  doc["train_inputs"] = std::move(inputs);
  doc["train_targets"] = Vector(targets_.data(), targets_.data() + targets_.size());
  return doc.dump();
}

GpModel GpModel::from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.value("format", "") != "invdoe.gp" || doc.value("version", 0) != 1) {
    throw Error("gp model json: unsupported format or version");
  }
  KernelConfig k;
  k.family = kernel_family_from_string(doc["kernel"]["family"].get<std::string>());
  k.lengthscales = doc["kernel"]["lengthscales"].get<Vector>();
  k.signal_variance = doc["kernel"]["signal_variance"].get<double>();
  k.noise_variance = doc["kernel"]["noise_variance"].get<double>();
  Normalization norm;
  norm.lower = doc["normalization"]["lower"].get<Vector>();
  norm.upper = doc["normalization"]["upper"].get<Vector>();
  norm.target_mean = doc["normalization"]["target_mean"].get<double>();
  norm.target_std = doc["normalization"]["target_std"].get<double>();
  const auto rows = doc["train_inputs"].get<std::vector<Vector>>();
  const auto targets = doc["train_targets"].get<Vector>();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(norm.lower.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    check_same_dimension(rows[i].size(), norm.lower.size(), "gp model json");
    for (std::size_t d = 0; d < rows[i].size(); ++d) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[i][d];
    }
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(),
                                                        static_cast<Eigen::Index>(targets.size()));
  return condition(std::move(x), std::move(y), std::move(k), doc["mean_constant"].get<double>(),
                   std::move(norm), doc["jitter"].get<double>());
}

namespace {

// Log marginal likelihood of standardized targets as a function of
// log-hyperparameters, with the constant mean profiled out.
class LikelihoodObjective {
 public:
  LikelihoodObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, KernelFamily family)
      : y_(y), family_(family), dim_(static_cast<std::size_t>(x.cols())) {
    const auto n = x.rows();
    sq_diffs_.reserve(dim_);
    for (std::size_t d = 0; d < dim_; ++d) {
      Eigen::MatrixXd m(n, n);
      const auto col = static_cast<Eigen::Index>(d);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const double t = x(i, col) - x(j, col);
          m(i, j) = t * t;
        }
      }
      sq_diffs_.push_back(std::move(m));
    }
  }

  struct Value {
    double lml = -std::numeric_limits<double>::infinity();
    double mean = 0.0;
  };

  // theta = [log l_1..l_D, log signal, log noise]
  Value operator()(const Vector& theta) const {
    const auto n = y_.size();
    Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t d = 0; d < dim_; ++d) {
      r2 += sq_diffs_[d] * std::exp(-2.0 * theta[d]);
    }
    const double signal = std::exp(theta[dim_]);
    const double noise = std::exp(theta[dim_ + 1]);
    Eigen::MatrixXd k = r2.unaryExpr([&](double v) { return kernel_from_r2(family_, v, signal); });
    k.diagonal().array() += noise;
    Eigen::MatrixXd lower;
    if (!factorize(k, 0.0, lower)) return {};
    const auto tri = lower.triangularView<Eigen::Lower>();
    const Eigen::VectorXd a_one = tri.solve(Eigen::VectorXd::Ones(n));
    const Eigen::VectorXd a_y = tri.solve(y_);
    const double denom = a_one.squaredNorm();
    const double mean = denom > 0.0 ? a_one.dot(a_y) / denom : 0.0;
    const Eigen::VectorXd w = a_y - mean * a_one;
    Value v;
    v.mean = mean;
    v.lml = -0.5 * w.squaredNorm() - lower.diagonal().array().log().sum() -
            0.5 * static_cast<double>(n) * kLog2Pi;
    if (!std::isfinite(v.lml)) v.lml = -std::numeric_limits<double>::infinity();
    return v;
  }

 private:
  Eigen::VectorXd y_;
  KernelFamily family_;
  std::size_t dim_;
  std::vector<Eigen::MatrixXd> sq_diffs_;
};

struct SearchResult {
  Vector theta;
  double lml = -std::numeric_limits<double>::infinity();
};

SearchResult coordinate_search(const LikelihoodObjective& objective, Vector theta,
                               const Vector& lo, const Vector& hi, const FitConfig& cfg) {
  const std::size_t p = theta.size();
  for (std::size_t i = 0; i < p; ++i) theta[i] = std::clamp(theta[i], lo[i], hi[i]);
  Vector step(p, 0.5);
  double best = objective(theta).lml;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    for (std::size_t i = 0; i < p; ++i) {
      bool improved = false;
      for (double dir : {1.0, -1.0}) {
        Vector trial = theta;
        trial[i] = std::clamp(theta[i] + dir * step[i], lo[i], hi[i]);
        if (trial[i] == theta[i]) continue;
        const double value = objective(trial).lml;
        if (value > best) {
          theta = std::move(trial);
          best = value;
          improved = true;
          break;
        }
      }
      step[i] = improved ? std::min(2.0 * step[i], 2.0) : 0.5 * step[i];
    }
    if (*std::max_element(step.begin(), step.end()) < cfg.step_tolerance) break;
  }
  return {std::move(theta), best};
}

}  // namespace

GpModel fit(const std::vector<Vector>& xs, const Vector& ys, const FitConfig& cfg) {
  if (xs.size() < 2) throw Error("gp fit: at least 2 observations required");
  check_same_dimension(xs.size(), ys.size(), "gp fit");
  const std::size_t dim = xs.front().size();
  const auto n = static_cast<Eigen::Index>(xs.size());

  Normalization norm;
  norm.lower = cfg.lower.value_or(Vector(dim, std::numeric_limits<double>::infinity()));
  norm.upper = cfg.upper.value_or(Vector(dim, -std::numeric_limits<double>::infinity()));
  check_same_dimension(norm.lower.size(), dim, "gp fit bounds");
  check_same_dimension(norm.upper.size(), dim, "gp fit bounds");
  if (!cfg.lower || !cfg.upper) {
    for (const auto& x : xs) {
      for (std::size_t d = 0; d < dim; ++d) {
        if (!cfg.lower) norm.lower[d] = std::min(norm.lower[d], x[d]);
        if (!cfg.upper) norm.upper[d] = std::max(norm.upper[d], x[d]);
      }
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    if (!(norm.upper[d] > norm.lower[d])) norm.upper[d] = norm.lower[d] + 1.0;
  }

  double mean = 0.0;
  for (double y : ys) {
    if (!std::isfinite(y)) throw Error("gp fit: non-finite target");
    mean += y;
  }
  mean /= static_cast<double>(ys.size());
  double var = 0.0;
  for (double y : ys) var += (y - mean) * (y - mean);
  double sd = std::sqrt(var / static_cast<double>(ys.size() - 1));
  if (!(sd > 1e-12 * (1.0 + std::abs(mean)))) sd = 1.0;
  norm.target_mean = mean;
  norm.target_std = sd;

  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(dim));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = xs[static_cast<std::size_t>(i)];
    check_same_dimension(row.size(), dim, "gp fit inputs");
    const Vector u = norm.to_unit(row);
    for (std::size_t d = 0; d < dim; ++d) x(i, static_cast<Eigen::Index>(d)) = u[d];
    y(i) = (ys[static_cast<std::size_t>(i)] - mean) / sd;
  }

  const LikelihoodObjective objective(x, y, cfg.family);
  Vector lo(dim + 2), hi(dim + 2);
  for (std::size_t d = 0; d < dim; ++d) {
    lo[d] = std::log(cfg.min_lengthscale);
    hi[d] = std::log(cfg.max_lengthscale);
  }
  lo[dim] = std::log(cfg.min_variance);
  hi[dim] = std::log(cfg.max_variance);
  lo[dim + 1] = std::log(std::max(cfg.min_variance, cfg.noise_floor));
  hi[dim + 1] = std::log(cfg.max_variance);

  SearchResult best;
  const std::size_t restarts = std::max<std::size_t>(cfg.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    Vector start(dim + 2);
    if (r == 0) {
      std::fill(start.begin(), start.begin() + static_cast<std::ptrdiff_t>(dim), std::log(0.3));
      start[dim] = 0.0;
      start[dim + 1] = std::log(1e-4);
    } else {
      std::mt19937_64 rng(derive_seed(cfg.seed, 0x6F, r));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t d = 0; d < dim; ++d) {
        start[d] = std::log(0.05) + unit(rng) * (std::log(2.0) - std::log(0.05));
      }
      start[dim] = std::log(0.1) + unit(rng) * (std::log(5.0) - std::log(0.1));
      start[dim + 1] = std::log(1e-6) + unit(rng) * (std::log(0.1) - std::log(1e-6));
    }
    SearchResult found = coordinate_search(objective, std::move(start), lo, hi, cfg);
    if (found.lml > best.lml) best = std::move(found);
  }
  if (!std::isfinite(best.lml)) throw IllConditionedError("ill-conditioned kernel");

  KernelConfig k;
  k.family = cfg.family;
  k.lengthscales.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) k.lengthscales[d] = std::exp(best.theta[d]);
  k.signal_variance = std::exp(best.theta[dim]);
  k.noise_variance = std::exp(best.theta[dim + 1]);
  const double mean_constant = objective(best.theta).mean;
  return GpModel::condition(std::move(x), std::move(y), std::move(k), mean_constant,
                            std::move(norm));
}

GpModel fit(const std::vector<Observation>& observations, std::size_t objective_index,
            const FitConfig& cfg) {
  if (observations.size() < 2) throw Error("gp fit: at least 2 observations required");
  std::vector<Vector> xs;
  Vector ys;
  xs.reserve(observations.size());
  for (const auto& o : observations) {
    if (objective_index >= o.y.size()) throw DimensionError("gp fit: objective index out of range");
    xs.push_back(o.x);
    ys.push_back(o.y[objective_index]);
  }
  return fit(xs, ys, cfg);
}

Eigen::MatrixXd covariance_root(const Eigen::MatrixXd& cov) {
  const auto q = cov.rows();
  if (q == 1) {
    return Eigen::MatrixXd::Constant(1, 1, std::sqrt(std::max(0.0, cov(0, 0))));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::VectorXd values = eig.eigenvalues();
  const double top = std::max(values.maxCoeff(), 0.0);
  const double floor = 1e-12 * top;
  for (Eigen::Index i = 0; i < q; ++i) values(i) = values(i) > floor ? std::sqrt(values(i)) : 0.0;
  return eig.eigenvectors() * values.asDiagonal();
}

Eigen::MatrixXd sample_posterior(const GpModel& model, const std::vector<Vector>& xs,
                                 std::size_t n_samples, std::uint64_t seed) {
  if (xs.empty()) throw Error("sample_posterior: q must be at least 1");
  if (n_samples == 0) throw Error("sample_posterior: n_samples must be at least 1");
  const JointPosterior jp = model.joint_posterior(xs);
  const Eigen::MatrixXd root = covariance_root(jp.covariance);
  const auto q = static_cast<Eigen::Index>(xs.size());
  const auto n = static_cast<Eigen::Index>(n_samples);
  const Vector z = sampling::standard_normals(n_samples * xs.size(), seed);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      base(z.data(), n, q);
  Eigen::MatrixXd out = base * root.transpose();
  out.rowwise() += jp.mean.transpose();
  return out;
}

}  // namespace invdoe::gp
