#include "invdoe/constraints.hpp"

#include <algorithm>
#include <cmath>

#include "invdoe/sampling.hpp"

namespace invdoe::problems {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

ConstraintSpec::ConstraintSpec(Vector lower, Vector upper, std::vector<std::string> names)
    : lower_(std::move(lower)), upper_(std::move(upper)), names_(std::move(names)) {
  check_same_dimension(lower_.size(), upper_.size(), "constraint bounds");
  if (names_.empty()) {
    for (std::size_t d = 0; d < lower_.size(); ++d) names_.push_back("x" + std::to_string(d + 1));
  }
  check_same_dimension(names_.size(), lower_.size(), "constraint names");
}

bool ConstraintSpec::has_equalities() const {
  return std::any_of(linear_.begin(), linear_.end(),
                     [](const auto& c) { return c.relation == Relation::Equal; });
}

ConstraintSpec& ConstraintSpec::add_less_equal(Vector coeffs, double bound, std::string name) {
  check_same_dimension(coeffs.size(), dim(), "linear constraint");
  linear_.push_back({std::move(coeffs), bound, Relation::LessEqual, 0.0, std::move(name)});
  return *this;
}

ConstraintSpec& ConstraintSpec::add_greater_equal(Vector coeffs, double bound, std::string name) {
  for (double& c : coeffs) c = -c;
  return add_less_equal(std::move(coeffs), -bound, std::move(name));
}

ConstraintSpec& ConstraintSpec::add_equal(Vector coeffs, double bound, double tolerance,
                                          std::string name) {
  check_same_dimension(coeffs.size(), dim(), "linear constraint");
  linear_.push_back({std::move(coeffs), bound, Relation::Equal, tolerance, std::move(name)});
  return *this;
}

ConstraintSpec& ConstraintSpec::set_witness(Vector x) {
  check_same_dimension(x.size(), dim(), "feasible witness");
  witness_ = std::move(x);
  return *this;
}

void ConstraintSpec::validate() const {
  for (std::size_t d = 0; d < dim(); ++d) {
    if (!std::isfinite(lower_[d]) || !std::isfinite(upper_[d]) || !(lower_[d] < upper_[d])) {
      throw Error("constraints: lower bound must be below upper bound for '" + names_[d] + "'");
    }
  }
  for (const auto& c : linear_) {
    if (dot(c.coeffs, c.coeffs) == 0.0) throw Error("constraints: all-zero linear constraint");
  }
  if (witness_.empty()) throw Error("constraints: no feasible witness stored");
  if (!is_feasible(witness_)) throw Error("constraints: stored witness is infeasible");
}

bool ConstraintSpec::in_box(std::span<const double> x) const {
  check_same_dimension(x.size(), dim(), "constraint check");
  for (std::size_t d = 0; d < dim(); ++d) {
    if (!(x[d] >= lower_[d] && x[d] <= upper_[d])) return false;
  }
  return true;
}

Vector ConstraintSpec::violations(std::span<const double> x) const {
  check_same_dimension(x.size(), dim(), "constraint check");
  Vector g;
  g.reserve(linear_.size());
  for (const auto& c : linear_) {
    const double r = dot(c.coeffs, x) - c.bound;
    g.push_back(c.relation == Relation::Equal ? std::abs(r) - c.tolerance : r);
  }
  return g;
}

double ConstraintSpec::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (double g : violations(x)) worst = std::max(worst, g);
  return worst;
}

bool ConstraintSpec::is_feasible(std::span<const double> x) const {
  if (!in_box(x)) return false;
  for (double g : violations(x)) {
    if (g > kInequalityTolerance) return false;
  }
  return true;
}

Vector ConstraintSpec::project(std::span<const double> x) const {
  check_same_dimension(x.size(), dim(), "projection");
  Vector y(x.begin(), x.end());
  if (is_feasible(y)) return y;

  const std::size_t sets = linear_.size() + 1;
  std::vector<Vector> increments(sets, Vector(dim(), 0.0));
  Vector z(dim());
  for (int cycle = 0; cycle < 5000; ++cycle) {
    double change = 0.0;
    for (std::size_t s = 0; s < sets; ++s) {
      for (std::size_t d = 0; d < dim(); ++d) z[d] = y[d] + increments[s][d];
      Vector p = z;
      if (s == 0) {
        for (std::size_t d = 0; d < dim(); ++d) p[d] = std::clamp(p[d], lower_[d], upper_[d]);
      } else {
        const auto& c = linear_[s - 1];
        const double r = dot(c.coeffs, p) - c.bound;
        if (c.relation == Relation::Equal || r > 0.0) {
          const double scale = r / dot(c.coeffs, c.coeffs);
          for (std::size_t d = 0; d < dim(); ++d) p[d] -= scale * c.coeffs[d];
        }
      }
      for (std::size_t d = 0; d < dim(); ++d) {
        increments[s][d] = z[d] - p[d];
        change = std::max(change, std::abs(p[d] - y[d]));
      }
      y = std::move(p);
    }
    if (change < 1e-15 && is_feasible(y)) break;
  }
  for (std::size_t d = 0; d < dim(); ++d) y[d] = std::clamp(y[d], lower_[d], upper_[d]);
  return y;
}

Vector ConstraintSpec::to_unit(std::span<const double> x) const {
  check_same_dimension(x.size(), dim(), "normalize");
  Vector u(dim());
  for (std::size_t d = 0; d < dim(); ++d) u[d] = (x[d] - lower_[d]) / (upper_[d] - lower_[d]);
  return u;
}

Vector ConstraintSpec::from_unit(std::span<const double> u) const {
  check_same_dimension(u.size(), dim(), "denormalize");
  Vector x(dim());
  for (std::size_t d = 0; d < dim(); ++d) {
    x[d] = std::clamp(lower_[d] + u[d] * (upper_[d] - lower_[d]), lower_[d], upper_[d]);
  }
  return x;
}

ConstraintSpec ConstraintSpec::normalized() const {
  ConstraintSpec out(Vector(dim(), 0.0), Vector(dim(), 1.0), names_);
  for (const auto& c : linear_) {
    LinearConstraint n = c;
    n.bound = c.bound - dot(c.coeffs, lower_);
    for (std::size_t d = 0; d < dim(); ++d) n.coeffs[d] = c.coeffs[d] * (upper_[d] - lower_[d]);
    out.linear_.push_back(std::move(n));
  }
  if (!witness_.empty()) out.witness_ = to_unit(witness_);
  return out;
}

std::vector<Vector> ConstraintSpec::sample_feasible(std::size_t n, std::uint64_t seed,
                                                    std::size_t max_rejections) const {
  sampling::QuasiRandom qrng(dim(), seed);
  const bool project_draws = has_equalities();
  std::vector<Vector> out;
  out.reserve(n);
  std::size_t rejected = 0;
  while (out.size() < n) {
    Vector x = from_unit(qrng.next());
    if (project_draws) x = project(x);
    if (is_feasible(x)) {
      out.push_back(std::move(x));
      rejected = 0;
    } else if (++rejected >= max_rejections) {
      throw InfeasibleRegionError("infeasible search region");
    }
  }
  return out;
}

}  // namespace invdoe::problems
