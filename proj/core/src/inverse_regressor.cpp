#include "invdoe/inverse_regressor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "csv.hpp"
#include "json.hpp"

namespace invdoe::inverse {

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  return a == Activation::Tanh ? Eigen::MatrixXd(z.array().tanh())
                               : Eigen::MatrixXd(z.array().max(0.0));
}

// Derivative expressed through the activation output h.
Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& h, Activation a) {
  if (a == Activation::Tanh) return (1.0 - h.array().square()).matrix();
  return (h.array() > 0.0).cast<double>().matrix();
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

struct Batch {
  Eigen::MatrixXd y;  // M x B, standardized
  Eigen::MatrixXd u;  // D x B, unit-cube targets
};

struct Penalty {
  Eigen::MatrixXd a;     // J x D, unit-cube coefficients
  Eigen::VectorXd b;     // J
  Eigen::VectorXd tol;   // J
  std::vector<bool> eq;  // J
};

Penalty make_penalty(const problems::ConstraintSpec& unit) {
  Penalty p;
  const auto& lin = unit.linear();
  const auto j_count = static_cast<Eigen::Index>(lin.size());
  p.a.resize(j_count, static_cast<Eigen::Index>(unit.dim()));
  p.b.resize(j_count);
  p.tol.resize(j_count);
  for (Eigen::Index j = 0; j < j_count; ++j) {
    const auto& c = lin[static_cast<std::size_t>(j)];
    for (std::size_t d = 0; d < unit.dim(); ++d) p.a(j, static_cast<Eigen::Index>(d)) = c.coeffs[d];
    p.b(j) = c.bound;
    p.tol(j) = c.relation == problems::Relation::Equal ? c.tolerance : 0.0;
    p.eq.push_back(c.relation == problems::Relation::Equal);
  }
  return p;
}

struct Forward {
  std::vector<Eigen::MatrixXd> hidden;  // activations per hidden layer
  Eigen::MatrixXd u;                    // D x B
};

Forward forward(const std::vector<Layer>& layers, Activation act, const Eigen::MatrixXd& y) {
  Forward f;
  Eigen::MatrixXd h = y;
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    Eigen::MatrixXd z = layers[k].weights * h;
    z.colwise() += layers[k].bias;
    h = activate(z, act);
    f.hidden.push_back(h);
  }
  Eigen::MatrixXd z = layers.back().weights * h;
  z.colwise() += layers.back().bias;
  f.u = sigmoid(z);
  return f;
}

struct LossTerms {
  double mse = 0.0;
  double penalty = 0.0;
  Eigen::MatrixXd grad_u;  // d(mean loss)/du, D x B
  std::size_t violating = 0;
};

LossTerms loss_terms(const Eigen::MatrixXd& u, const Eigen::MatrixXd& target, const Penalty& pen,
                     double lambda, bool want_grad) {
  LossTerms t;
  const double d_count = static_cast<double>(u.rows());
  const double b_count = static_cast<double>(u.cols());
  const Eigen::MatrixXd diff = u - target;
  t.mse = diff.squaredNorm() / d_count / b_count;
  if (want_grad) t.grad_u = 2.0 * diff / (d_count * b_count);
  if (pen.a.rows() == 0) return t;
  Eigen::MatrixXd r = pen.a * u;
  r.colwise() -= pen.b;
  for (Eigen::Index col = 0; col < u.cols(); ++col) {
    bool violated = false;
    for (Eigen::Index j = 0; j < r.rows(); ++j) {
      const bool eq = pen.eq[static_cast<std::size_t>(j)];
      const double g = eq ? std::abs(r(j, col)) - pen.tol(j) : r(j, col);
      if (g <= 0.0) continue;
      if (g > problems::ConstraintSpec::kInequalityTolerance) violated = true;
      t.penalty += g * g / b_count;
      if (want_grad) {
        const double sign = eq ? (r(j, col) >= 0.0 ? 1.0 : -1.0) : 1.0;
        t.grad_u.col(col) += lambda * 2.0 * g * sign / b_count * pen.a.row(j).transpose();
      }
    }
    if (violated) ++t.violating;
  }
  return t;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation activation_from_string(const std::string& text) {
  if (text == "tanh") return Activation::Tanh;
  if (text == "relu") return Activation::Relu;
  throw Error("unknown activation '" + text + "'");
}

CaftLossReport caft_loss(std::span<const double> x_pred, std::span<const double> x_true,
                         const problems::ConstraintSpec& constraints, double lambda) {
  check_same_dimension(x_pred.size(), x_true.size(), "caft_loss");
  check_same_dimension(x_pred.size(), constraints.dim(), "caft_loss constraints");
  CaftLossReport rep;
  for (std::size_t d = 0; d < x_pred.size(); ++d) {
    const double e = x_pred[d] - x_true[d];
    rep.mse_term += e * e;
  }
  if (!x_pred.empty()) rep.mse_term /= static_cast<double>(x_pred.size());
  for (double g : constraints.violations(x_pred)) {
    if (g > 0.0) rep.penalty_term += g * g;
  }
  rep.total = rep.mse_term + lambda * rep.penalty_term;
  return rep;
}

std::vector<std::size_t> RegressorModel::widths() const {
  std::vector<std::size_t> w = {input_dim()};
  for (const auto& l : layers_) w.push_back(static_cast<std::size_t>(l.weights.rows()));
  return w;
}

Eigen::VectorXd RegressorModel::standardize(std::span<const double> y) const {
  check_same_dimension(y.size(), input_dim(), "predict target");
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t m = 0; m < y.size(); ++m) {
    v(static_cast<Eigen::Index>(m)) = (y[m] - y_mean_[m]) / y_std_[m];
  }
  return v;
}

Vector RegressorModel::predict_unit(std::span<const double> y_target) const {
  const Forward f = forward(layers_, activation_, standardize(y_target));
  Vector u(output_dim());
  for (std::size_t d = 0; d < u.size(); ++d) u[d] = f.u(static_cast<Eigen::Index>(d), 0);
  return u;
}

Vector RegressorModel::predict(std::span<const double> y_target) const {
  Vector x = predict_unit(y_target);
  for (std::size_t d = 0; d < x.size(); ++d) {
    x[d] = std::clamp(lower_[d] + x[d] * (upper_[d] - lower_[d]), lower_[d], upper_[d]);
  }
  return x;
}

RegressorModel train(const std::vector<Vector>& xs, const std::vector<Vector>& ys,
                     const problems::ConstraintSpec& constraints, const TrainConfig& cfg,
                     std::uint64_t seed) {
  check_same_dimension(xs.size(), ys.size(), "train");
  if (xs.size() < 10) throw Error("train: dataset needs at least 10 rows");
  if (cfg.batch_size == 0 || cfg.epochs == 0) throw Error("train: batch size and epochs must be positive");
  if (!(cfg.lambda >= 0.0)) throw Error("train: lambda must be non-negative");
  const std::size_t n = xs.size();
  const std::size_t m_count = ys.front().size();
  const std::size_t d_count = constraints.dim();
  for (std::size_t i = 0; i < n; ++i) {
    check_same_dimension(xs[i].size(), d_count, "train inputs");
    check_same_dimension(ys[i].size(), m_count, "train targets");
  }

  RegressorModel model;
  model.activation_ = cfg.activation;
  model.lambda_ = cfg.lambda;
  model.lower_ = constraints.lower();
  model.upper_ = constraints.upper();
  model.names_ = constraints.names();
  model.y_mean_.assign(m_count, 0.0);
  model.y_std_.assign(m_count, 0.0);
  for (const auto& y : ys) {
    for (std::size_t m = 0; m < m_count; ++m) model.y_mean_[m] += y[m] / static_cast<double>(n);
  }
  for (const auto& y : ys) {
    for (std::size_t m = 0; m < m_count; ++m) {
      const double e = y[m] - model.y_mean_[m];
      model.y_std_[m] += e * e / static_cast<double>(n);
    }
  }
  for (double& s : model.y_std_) s = s > 1e-24 ? std::sqrt(s) : 1.0;

  // Fixed split from the seed.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(derive_seed(seed, 0x5B));
  std::shuffle(order.begin(), order.end(), split_rng);
  std::size_t n_val = static_cast<std::size_t>(std::round(cfg.validation_fraction * static_cast<double>(n)));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  const std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  const std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  const problems::ConstraintSpec unit = constraints.normalized();
  const Penalty pen = make_penalty(unit);
  auto gather = [&](const std::vector<std::size_t>& idx) {
    Batch b;
    b.y.resize(static_cast<Eigen::Index>(m_count), static_cast<Eigen::Index>(idx.size()));
    b.u.resize(static_cast<Eigen::Index>(d_count), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
      b.y.col(static_cast<Eigen::Index>(c)) = model.standardize(ys[idx[c]]);
      const Vector u = constraints.to_unit(xs[idx[c]]);
      for (std::size_t d = 0; d < d_count; ++d) {
        b.u(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(c)) = u[d];
      }
    }
    return b;
  };
  const Batch val = gather(val_idx);

  // Glorot-uniform initialization.
  std::mt19937_64 rng(derive_seed(seed, 0x1A));
  std::vector<std::size_t> widths = {m_count};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(d_count);
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const auto in = static_cast<Eigen::Index>(widths[k]);
    const auto out = static_cast<Eigen::Index>(widths[k + 1]);
    if (in == 0 || out == 0) throw Error("train: layer widths must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = dist(rng);
    }
    model.layers_.push_back(std::move(layer));
  }

  const std::size_t layer_count = model.layers_.size();
  std::vector<Eigen::MatrixXd> mw(layer_count), vw(layer_count);
  std::vector<Eigen::VectorXd> mb(layer_count), vb(layer_count);
  for (std::size_t k = 0; k < layer_count; ++k) {
    mw[k] = vw[k] = Eigen::MatrixXd::Zero(model.layers_[k].weights.rows(), model.layers_[k].weights.cols());
    mb[k] = vb[k] = Eigen::VectorXd::Zero(model.layers_[k].bias.size());
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double lr = cfg.learning_rate;
  std::size_t adam_t = 0;

  std::vector<Layer> best_layers = model.layers_;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<std::size_t> shuffled = train_idx;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < shuffled.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(shuffled.size(), start + cfg.batch_size);
      const Batch b = gather({shuffled.begin() + static_cast<std::ptrdiff_t>(start),
                              shuffled.begin() + static_cast<std::ptrdiff_t>(stop)});
      const Forward f = forward(model.layers_, cfg.activation, b.y);
      LossTerms lt = loss_terms(f.u, b.u, pen, cfg.lambda, true);
      const double batch_loss = lt.mse + cfg.lambda * lt.penalty;
      if (!std::isfinite(batch_loss)) throw DivergedError("diverged; reduce learning rate");
      epoch_loss += batch_loss * static_cast<double>(stop - start);

      // Backpropagation.
      Eigen::MatrixXd delta = lt.grad_u.array() * f.u.array() * (1.0 - f.u.array());
      ++adam_t;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
      for (std::size_t k = layer_count; k-- > 0;) {
        const Eigen::MatrixXd& input = k == 0 ? b.y : f.hidden[k - 1];
        const Eigen::MatrixXd gw = delta * input.transpose();
        const Eigen::VectorXd gb = delta.rowwise().sum();
        if (k > 0) {
          delta = (model.layers_[k].weights.transpose() * delta).cwiseProduct(
              activation_grad(f.hidden[k - 1], cfg.activation));
        }
        mw[k] = beta1 * mw[k] + (1.0 - beta1) * gw;
        vw[k] = beta2 * vw[k] + (1.0 - beta2) * gw.cwiseProduct(gw);
        mb[k] = beta1 * mb[k] + (1.0 - beta1) * gb;
        vb[k] = beta2 * vb[k] + (1.0 - beta2) * gb.cwiseProduct(gb);
        model.layers_[k].weights.array() -=
            lr * (mw[k].array() / c1) / ((vw[k].array() / c2).sqrt() + eps);
        model.layers_[k].bias.array() -=
            lr * (mb[k].array() / c1) / ((vb[k].array() / c2).sqrt() + eps);
      }
    }
    epoch_loss /= static_cast<double>(shuffled.size());

    const Forward fv = forward(model.layers_, cfg.activation, val.y);
    const LossTerms vt = loss_terms(fv.u, val.u, pen, cfg.lambda, false);
    const double val_loss = vt.mse + cfg.lambda * vt.penalty;
    if (!std::isfinite(val_loss)) throw DivergedError("diverged; reduce learning rate");
    model.curve_.push_back({epoch, epoch_loss, val_loss,
                            static_cast<double>(vt.violating) / static_cast<double>(n_val)});
    if (val_loss < best_val) {
      best_val = val_loss;
      best_layers = model.layers_;
      model.best_epoch_ = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.plateau_patience) {
      lr *= 0.5;
      since_best = 0;
    }
  }
  model.layers_ = std::move(best_layers);
  return model;
}

void write_training_curve_csv(const std::filesystem::path& path,
                              const std::vector<EpochRecord>& curve) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "epoch,train,val,violation_rate\n";
  for (const auto& r : curve) {
    out << r.epoch << ',' << csv::format_number(r.train_loss) << ','
        << csv::format_number(r.validation_loss) << ',' << csv::format_number(r.violation_rate)
        << '\n';
  }
}

std::string RegressorModel::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = "invdoe.inverse";
  doc["version"] = 1;
  doc["widths"] = widths();
  doc["activation"] = to_string(activation_);
  doc["lambda"] = lambda_;
  doc["y_mean"] = y_mean_;
  doc["y_std"] = y_std_;
  doc["lower"] = lower_;
  doc["upper"] = upper_;
  doc["names"] = names_;
  doc["best_epoch"] = best_epoch_;
  auto layers = nlohmann::ordered_json::array();
  for (const auto& l : layers_) {
    auto rows = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      Vector row(static_cast<std::size_t>(l.weights.cols()));
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row[static_cast<std::size_t>(c)] = l.weights(r, c);
      rows.push_back(row);
    }
    layers.push_back({{"weights", rows}, {"bias", Vector(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  doc["layers"] = layers;
  return doc.dump();
}

RegressorModel RegressorModel::from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.value("format", "") != "invdoe.inverse" || doc.value("version", 0) != 1) {
    throw Error("regressor json: unsupported format or version");
  }
  RegressorModel m;
  m.activation_ = activation_from_string(doc["activation"].get<std::string>());
  m.lambda_ = doc["lambda"].get<double>();
  m.y_mean_ = doc["y_mean"].get<Vector>();
  m.y_std_ = doc["y_std"].get<Vector>();
  m.lower_ = doc["lower"].get<Vector>();
  m.upper_ = doc["upper"].get<Vector>();
  m.names_ = doc["names"].get<std::vector<std::string>>();
  m.best_epoch_ = doc.value("best_epoch", std::size_t{0});
  std::size_t in = m.y_mean_.size();
  for (const auto& l : doc["layers"]) {
    const auto rows = l["weights"].get<std::vector<Vector>>();
    const auto bias = l["bias"].get<Vector>();
    Layer layer{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(in)),
                Eigen::VectorXd(static_cast<Eigen::Index>(bias.size()))};
    check_same_dimension(bias.size(), rows.size(), "regressor json bias");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      check_same_dimension(rows[r].size(), in, "regressor json weights");
      for (std::size_t c = 0; c < in; ++c) {
        layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
      layer.bias(static_cast<Eigen::Index>(r)) = bias[r];
    }
    in = rows.size();
    m.layers_.push_back(std::move(layer));
  }
  if (m.layers_.empty()) throw Error("regressor json: no layers");
  check_same_dimension(in, m.lower_.size(), "regressor json output");
  return m;
}

}  // namespace invdoe::inverse
