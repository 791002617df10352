#include "invdoe/problem_suite.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "csv.hpp"
#include "invdoe/sampling.hpp"
#include "json.hpp"

namespace invdoe::problems {

namespace {

constexpr std::size_t kAnalyticResolution = 500;

Vector biobj_quadratic(std::span<const double> x) {
  return {x[0] * x[0] + x[1] * x[1], (x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1]};
}

pareto::ReferenceFront quadratic_front(std::size_t n) {
  pareto::ReferenceFront out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back({t * t, (1.0 - t) * (1.0 - t)});
  }
  return out;
}

// Pareto set: the line x1 + x2 = 0.25 from (0.125, 0.125) to (0.25, 0), then
// the axis segment x2 = 0 up to x1 = 1. Points are spread by arc length.
pareto::ReferenceFront constrained_front(std::size_t n) {
  const double diag = 0.125 * std::sqrt(2.0);
  const double flat = 0.75;
  pareto::ReferenceFront out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (diag + flat) * static_cast<double>(i) / static_cast<double>(n - 1);
    Vector x(2);
    if (s < diag) {
      const double t = s / diag;
      x = {0.125 + 0.125 * t, 0.125 - 0.125 * t};
    } else {
      x = {std::min(1.0, 0.25 + (s - diag)), 0.0};
    }
    out.push_back(biobj_quadratic(x));
  }
  return out;
}

Vector mixture_objectives(std::span<const double> x) {
  Vector y(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double t = x[d] - (d == i ? 1.0 : 0.0);
      y[i] += t * t;
    }
  }
  return y;
}

void finish(ProblemSpec& p, std::size_t resolution) {
  p.constraints.validate();
  p.reference_front = true_front(p, resolution);
  p.reference_point = pareto::default_reference_point(p.reference_front, p.reference_front);
}

Evaluator box_evaluator(ConstraintSpec constraints, std::function<Vector(std::span<const double>)> f) {
  return [constraints = std::move(constraints), f = std::move(f)](std::span<const double> x) {
    return Evaluation{f(x), constraints.is_feasible(x)};
  };
}

std::string hex(const unsigned char* data, unsigned int len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += digits[data[i] >> 4];
    out += digits[data[i] & 0xF];
  }
  return out;
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::Optimize ? "optimize" : "target-match"; }

Evaluation ProblemSpec::evaluate(std::span<const double> x) const {
  check_same_dimension(x.size(), dim, "evaluate");
  if (!evaluator) throw Error("problem '" + id + "' has no evaluator");
  return evaluator(x);
}

Vector ProblemSpec::minimized(std::span<const double> y) const {
  return pareto::to_minimization(y, senses);
}

std::vector<std::string> registered_problems() {
  return {"biobj-quadratic", "constrained-biobj", "mixture-triobj", "resin-demo"};
}

ProblemSpec make_synthetic(const std::string& id, std::uint64_t seed) {
  ProblemSpec p;
  p.id = id;
  p.seed = seed;
  p.mode = Mode::Optimize;
  if (id == "biobj-quadratic" || id == "constrained-biobj") {
    p.dim = 2;
    p.n_objectives = 2;
    p.objective_names = {"f1", "f2"};
    p.senses = {Sense::Minimize, Sense::Minimize};
    p.constraints = ConstraintSpec({-1.0, -1.0}, {2.0, 2.0});
    if (id == "constrained-biobj") {
      p.constraints.add_greater_equal({1.0, 1.0}, 0.25, "x1 + x2 >= 0.25");
      p.constraints.set_witness({0.5, 0.0});
      p.analytic = constrained_front;
    } else {
      p.constraints.set_witness({0.5, 0.0});
      p.analytic = quadratic_front;
    }
    p.analytic_front = true;
    p.evaluator = box_evaluator(p.constraints, biobj_quadratic);
    finish(p, kAnalyticResolution);
    return p;
  }
  if (id == "mixture-triobj") {
    p.dim = 4;
    p.n_objectives = 3;
    p.objective_names = {"f1", "f2", "f3"};
    p.senses = {Sense::Minimize, Sense::Minimize, Sense::Minimize};
    p.constraints = ConstraintSpec(Vector(4, 0.0), Vector(4, 1.0));
    p.constraints.add_equal(Vector(4, 1.0), 1.0, 1e-6, "sum(x) = 1");
    p.constraints.set_witness(Vector(4, 0.25));
    p.evaluator = box_evaluator(p.constraints, mixture_objectives);
    finish(p, 4096);
    return p;
  }
  std::string known;
  for (const auto& name : registered_problems()) {
    if (name == "resin-demo") continue;
    known += (known.empty() ? "" : ", ") + name;
  }
  throw NotFoundError("unknown problem '" + id + "'; registered: " + known);
}

ProblemSpec make_problem(const std::string& id, std::uint64_t seed) {
  if (id != "resin-demo") {
    const auto ids = registered_problems();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      std::string known;
      for (const auto& name : ids) known += (known.empty() ? "" : ", ") + name;
      throw NotFoundError("unknown problem '" + id + "'; registered: " + known);
    }
    return make_synthetic(id, seed);
  }
  // The demo ground truth is fitted once per process and seed.
  static std::mutex mutex;
  static std::map<std::uint64_t, ProblemSpec> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(seed);
  if (it == cache.end()) {
    GroundTruthOptions options;
    options.id = "resin-demo";
    options.constraints = resin_demo_constraints();
    it = cache.emplace(seed, fit_ground_truth(resin_demo_dataset(), seed, options)).first;
  }
  return it->second;
}

pareto::ReferenceFront true_front(const ProblemSpec& problem, std::size_t resolution) {
  if (resolution < 2) throw Error("true_front: resolution must be at least 2");
  if (problem.analytic) return problem.analytic(resolution);
  const auto xs = problem.constraints.sample_feasible(resolution, derive_seed(problem.seed, 0x7F));
  std::vector<Vector> images;
  images.reserve(xs.size());
  for (const auto& x : xs) {
    const Evaluation e = problem.evaluate(x);
    if (e.feasible) images.push_back(problem.minimized(e.y));
  }
  if (images.empty()) throw InfeasibleRegionError("infeasible search region");
  return pareto::pareto_filter(images);
}

ProblemSpec with_target(const ProblemSpec& problem, const Vector& target, std::size_t resolution) {
  check_same_dimension(target.size(), problem.n_objectives, "target");
  for (double t : target) {
    if (!std::isfinite(t)) throw Error("target values must be finite");
  }
  ProblemSpec p = problem;
  p.mode = Mode::TargetMatch;
  p.target = target;
  p.senses.assign(problem.n_objectives, Sense::Minimize);
  p.analytic = nullptr;
  p.analytic_front = false;
  p.evaluator = [inner = problem.evaluator, target](std::span<const double> x) {
    Evaluation e = inner(x);
    for (std::size_t m = 0; m < e.y.size(); ++m) e.y[m] = std::abs(e.y[m] - target[m]);
    return e;
  };
  p.reference_front = true_front(p, resolution);
  p.reference_point = pareto::default_reference_point(p.reference_front, p.reference_front);
  return p;
}

Dataset parse_dataset(const std::string& csv_text, const Schema& schema, LoadReport* report) {
  if (schema.inputs.empty() || schema.outputs.empty()) {
    throw Error("dataset schema needs at least one input and one output column");
  }
  if (!schema.senses.empty()) check_same_dimension(schema.senses.size(), schema.outputs.size(), "schema senses");
  const csv::Table table = csv::parse(csv_text);
  auto column = [&](const std::string& name) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw NotFoundError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  std::vector<std::size_t> in_cols, out_cols;
  for (const auto& n : schema.inputs) in_cols.push_back(column(n));
  for (const auto& n : schema.outputs) out_cols.push_back(column(n));

  Dataset ds;
  ds.schema = schema;
  LoadReport local;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    ++local.rows_read;
    bool ok = row.size() == table.header.size();
    Vector x, y;
    for (std::size_t c : in_cols) {
      if (!ok) break;
      auto v = csv::parse_number(row[c]);
      ok = v.has_value();
      if (ok) x.push_back(*v);
    }
    for (std::size_t c : out_cols) {
      if (!ok) break;
      auto v = csv::parse_number(row[c]);
      ok = v.has_value();
      if (ok) y.push_back(*v);
    }
    if (!ok) {
      ++local.dropped;
      local.dropped_lines.push_back(table.line_numbers[r]);
      continue;
    }
    ds.x.push_back(std::move(x));
    ds.y.push_back(std::move(y));
  }
  local.rows_kept = ds.x.size();
  if (report) *report = local;
  if (ds.x.empty()) throw Error("dataset: zero valid rows");
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open dataset '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_dataset(text.str(), schema, report);
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  std::vector<std::string> header = dataset.schema.inputs;
  header.insert(header.end(), dataset.schema.outputs.begin(), dataset.schema.outputs.end());
  out << csv::join_row(header) << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::vector<std::string> fields;
    for (double v : dataset.x[i]) fields.push_back(csv::format_number(v));
    for (double v : dataset.y[i]) fields.push_back(csv::format_number(v));
    out << csv::join_row(fields) << '\n';
  }
}

std::string dataset_hash(const Dataset& dataset) {
  std::string text;
  for (const auto& n : dataset.schema.inputs) text += "in:" + n + '\n';
  for (const auto& n : dataset.schema.outputs) text += "out:" + n + '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.x[i]) text += csv::format_number(v) + ',';
    for (double v : dataset.y[i]) text += csv::format_number(v) + ',';
    text += '\n';
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("dataset hash: digest failed");
  }
  return hex(digest, len);
}

ProblemSpec fit_ground_truth(const Dataset& dataset, std::uint64_t seed,
                             const GroundTruthOptions& options) {
  if (dataset.size() < 2) throw Error("fit_ground_truth: at least 2 rows required");
  const std::size_t dim = dataset.dim();
  const std::size_t m_count = dataset.n_outputs();

  ConstraintSpec constraints;
  if (options.constraints) {
    constraints = *options.constraints;
    check_same_dimension(constraints.dim(), dim, "ground-truth constraints");
  } else {
    Vector lo(dim, std::numeric_limits<double>::infinity());
    Vector hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& x : dataset.x) {
      for (std::size_t d = 0; d < dim; ++d) {
        lo[d] = std::min(lo[d], x[d]);
        hi[d] = std::max(hi[d], x[d]);
      }
    }
    for (std::size_t d = 0; d < dim; ++d) {
      if (!(hi[d] > lo[d])) hi[d] = lo[d] + 1.0;
    }
    constraints = ConstraintSpec(lo, hi, dataset.schema.inputs);
    constraints.set_witness(dataset.x.front());
  }
  if (constraints.feasible_witness().empty()) constraints.set_witness(dataset.x.front());

  gp::FitConfig cfg;
  cfg.family = options.family;
  cfg.seed = seed;
  cfg.lower = constraints.lower();
  cfg.upper = constraints.upper();
  auto models = std::make_shared<std::vector<gp::GpModel>>();
  for (std::size_t m = 0; m < m_count; ++m) {
    Vector ys;
    ys.reserve(dataset.size());
    for (const auto& y : dataset.y) ys.push_back(y[m]);
    cfg.seed = derive_seed(seed, 0x47, m);
    models->push_back(gp::fit(dataset.x, ys, cfg));
  }

  ProblemSpec p;
  p.id = options.id;
  p.dim = dim;
  p.n_objectives = m_count;
  p.objective_names = dataset.schema.outputs;
  p.senses = dataset.schema.senses.empty() ? std::vector<Sense>(m_count, Sense::Minimize)
                                           : dataset.schema.senses;
  p.constraints = constraints;
  p.seed = seed;
  p.dataset_hash = dataset_hash(dataset);
  p.prior_x = dataset.x;
  p.prior_y = dataset.y;
  p.ground_truth = models;
  p.evaluator = [models, constraints](std::span<const double> x) {
    Evaluation e;
    e.y.reserve(models->size());
    for (const auto& model : *models) e.y.push_back(model.posterior(x).mean);
    e.feasible = constraints.is_feasible(x);
    return e;
  };
  finish(p, options.front_resolution);
  return p;
}

Schema resin_demo_schema() {
  Schema s;
  s.inputs = {"Vinyl ", "Polyols ", "Epichlorohydrin ", "Bisphenol ",
              "Polyesters ", "TEPA ", "Amine ", "Isocyanates "};
  s.outputs = {"Potlife", "Viscosity", "Adhesion", "Hardness"};
  s.input_units = std::vector<std::string>(8, "wt%");
  s.output_units = {"min", "Pa.s", "MPa", "Shore D"};
  s.senses = {Sense::Maximize, Sense::Minimize, Sense::Maximize, Sense::Maximize};
  return s;
}

ConstraintSpec resin_demo_constraints() {
  ConstraintSpec c({0, 0, 10, 10, 0, 0, 5, 0}, {5, 5, 40, 45, 25, 5, 35, 5},
                   resin_demo_schema().inputs);
  c.set_witness({2.5, 2.5, 25, 27.5, 12.5, 2.5, 20, 2.5});
  return c;
}

Dataset resin_demo_dataset() {
  const ConstraintSpec box = resin_demo_constraints();
  Dataset ds;
  ds.schema = resin_demo_schema();
  sampling::QuasiRandom qrng(8, 2024);
  for (int i = 0; i < 64; ++i) {
    const Vector u = qrng.next();
    // u: Vinyl, Polyols, Epi, Bis, Polyesters, TEPA, Amine, Iso
    const double potlife = 12.0 + 10.0 * (1.0 - u[5]) * (1.0 - 0.5 * u[6]) + 4.0 * u[4];
    const double viscosity = 6.0 + 8.0 * u[3] + 3.0 * u[2] * u[1] - 2.0 * u[0];
    const double adhesion = 0.1 + 0.3 * u[2] * (1.0 - u[7]) + 0.1 * u[0];
    const double hardness = 55.0 + 20.0 * u[6] + 10.0 * u[3] * u[5] - 5.0 * u[4];
    ds.x.push_back(box.from_unit(u));
    ds.y.push_back({potlife, viscosity, adhesion, hardness});
  }
  return ds;
}

std::string problem_to_json(const ProblemSpec& p) {
  nlohmann::ordered_json doc;
  doc["format"] = "invdoe.problem";
  doc["version"] = 1;
  doc["id"] = p.id;
  doc["mode"] = to_string(p.mode);
  doc["dim"] = p.dim;
  doc["n_objectives"] = p.n_objectives;
  doc["objective_names"] = p.objective_names;
  auto senses = nlohmann::ordered_json::array();
  for (Sense s : p.senses) senses.push_back(to_string(s));
  doc["senses"] = senses;
  doc["input_names"] = p.constraints.names();
  doc["lower"] = p.constraints.lower();
  doc["upper"] = p.constraints.upper();
  auto linear = nlohmann::ordered_json::array();
  for (const auto& c : p.constraints.linear()) {
    linear.push_back({{"name", c.name},
                      {"coeffs", c.coeffs},
                      {"relation", c.relation == Relation::Equal ? "eq" : "le"},
                      {"bound", c.bound},
                      {"tolerance", c.tolerance}});
  }
  doc["linear_constraints"] = linear;
  doc["feasible_witness"] = p.constraints.feasible_witness();
  if (p.mode == Mode::TargetMatch) doc["target"] = p.target;
  doc["analytic_front"] = static_cast<bool>(p.analytic);
  doc["reference_point"] = p.reference_point;
  doc["reference_front"] = p.reference_front;
  doc["seed"] = p.seed;
  doc["dataset_hash"] = p.dataset_hash.empty() ? nlohmann::ordered_json(nullptr)
                                               : nlohmann::ordered_json(p.dataset_hash);
  return doc.dump(2);
}

}  // namespace invdoe::problems
