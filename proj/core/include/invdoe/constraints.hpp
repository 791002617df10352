#pragma once

// Box and linear constraints on the design space, with projection and
// feasible sampling. "Cheap" constraints: checked analytically, never modeled.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "invdoe/common.hpp"

namespace invdoe::problems {

enum class Relation { LessEqual, Equal };

/// coeffs . x (relation) bound
struct LinearConstraint {
  Vector coeffs;
  double bound = 0.0;
  Relation relation = Relation::LessEqual;
  double tolerance = 1e-6;  // equalities only
  std::string name;
};

class ConstraintSpec {
 public:
  static constexpr double kInequalityTolerance = 1e-9;

  ConstraintSpec() = default;
  ConstraintSpec(Vector lower, Vector upper, std::vector<std::string> names = {});

  std::size_t dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<LinearConstraint>& linear() const { return linear_; }
  const Vector& feasible_witness() const { return witness_; }
  bool has_equalities() const;

  ConstraintSpec& add_less_equal(Vector coeffs, double bound, std::string name = {});
  /// coeffs . x >= bound, stored as -coeffs . x <= -bound.
  ConstraintSpec& add_greater_equal(Vector coeffs, double bound, std::string name = {});
  ConstraintSpec& add_equal(Vector coeffs, double bound, double tolerance = 1e-6,
                            std::string name = {});
  ConstraintSpec& set_witness(Vector x);

  /// Throws Error when bounds are malformed or the witness is infeasible.
  void validate() const;

  bool in_box(std::span<const double> x) const;
  bool is_feasible(std::span<const double> x) const;
  /// g_j(x) per linear constraint, feasible iff <= 0. Equalities report
  /// |a.x - b| - tolerance.
  Vector violations(std::span<const double> x) const;
  double max_violation(std::span<const double> x) const;

  /// Closest feasible point (Dykstra's alternating projections). Feasible
  /// inputs are returned unchanged.
  Vector project(std::span<const double> x) const;

  /// The same region expressed in unit-cube coordinates.
  ConstraintSpec normalized() const;
  Vector to_unit(std::span<const double> x) const;
  /// Unit-cube coordinates back to raw units, clamped to the box.
  Vector from_unit(std::span<const double> u) const;

  /// `n` quasi-random feasible points. Draws are rejected if infeasible, or
  /// projected when equalities make rejection hopeless. Throws
  /// InfeasibleRegionError("infeasible search region") after
  /// `max_rejections` consecutive failures.
  std::vector<Vector> sample_feasible(std::size_t n, std::uint64_t seed,
                                      std::size_t max_rejections = 1000) const;

 private:
  Vector lower_;
  Vector upper_;
  std::vector<std::string> names_;
  std::vector<LinearConstraint> linear_;
  Vector witness_;
};

}  // namespace invdoe::problems
