#pragma once

// Pareto dominance, front filtering and the five front-quality metrics
// (GD, IGD, HV, SP, MS). All objective vectors handed to this module are in
// the minimization convention; use to_minimization() at the boundary.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invdoe/common.hpp"

namespace invdoe::pareto {

inline constexpr double kDuplicateTolerance = 1e-12;
inline constexpr std::size_t kMonteCarloHvSamples = std::size_t{1} << 16;

Vector to_minimization(std::span<const double> values, std::span<const Sense> senses);
Vector from_minimization(std::span<const double> values, std::span<const Sense> senses);

/// One front member: generating input and its objective vector.
struct FrontMember {
  Vector x;
  Vector f;
};

using ParetoFront = std::vector<FrontMember>;
using ReferenceFront = std::vector<Vector>;

std::vector<Vector> objectives_of(const ParetoFront& front);

/// a <= b componentwise and a < b somewhere. Throws DimensionError on size mismatch.
bool dominates(std::span<const double> a, std::span<const double> b);
bool weakly_dominates(std::span<const double> a, std::span<const double> b);

/// Indices (ascending) of points not dominated by any other input point, with
/// within-tolerance duplicates collapsed onto their first occurrence.
std::vector<std::size_t> nondominated_indices(const std::vector<Vector>& points);

ParetoFront pareto_filter(const std::vector<FrontMember>& points);
std::vector<Vector> pareto_filter(const std::vector<Vector>& points);

double gd(const std::vector<Vector>& front, const ReferenceFront& ref);
double igd(const std::vector<Vector>& front, const ReferenceFront& ref);

struct HypervolumeResult {
  double value = 0.0;
  double std_error = 0.0;  // zero on the exact paths (M <= 4)
  bool exact = true;
};

/// Dominated hypervolume relative to `reference`. Exact sweep for M = 2,
/// recursive slicing for M = 3..4, quasi-Monte Carlo for M >= 5.
/// Throws InvalidReferencePointError if a member does not weakly dominate it.
HypervolumeResult hypervolume_detailed(const std::vector<Vector>& front,
                                       std::span<const double> reference);
double hypervolume(const std::vector<Vector>& front, std::span<const double> reference);

/// Schott spacing; nullopt for fewer than two members.
std::optional<double> spacing(const std::vector<Vector>& front);

double max_spread(const std::vector<Vector>& front);

/// Nadir of (front ∪ ref) pushed out by 10% of each objective's range
/// (at least 1e-6).
Vector default_reference_point(const std::vector<Vector>& front, const ReferenceFront& ref);

struct MetricsReport {
  std::optional<double> gd;
  std::optional<double> igd;
  std::optional<double> hv;
  std::optional<double> spacing;
  std::optional<double> max_spread;
  std::size_t pareto_size = 0;
  double hv_std_error = 0.0;
  Vector reference_point;
  std::optional<std::string> warning;

  bool has_metrics() const { return gd.has_value(); }
};

enum class HvPolicy {
  Strict,          // members beyond the reference point are an error
  ClipToReference  // members beyond the reference point contribute nothing
};

MetricsReport metrics_report(const std::vector<Vector>& front, const ReferenceFront& ref,
                             std::optional<Vector> reference_point = std::nullopt,
                             HvPolicy policy = HvPolicy::Strict);

/// Wire document with exactly the report keys of the metrics endpoint.
std::string report_to_json(const MetricsReport& report, int indent = 2);
MetricsReport report_from_json(const std::string& text);

/// Extended document (adds reference point, HV standard error, warning).
std::string report_details_to_json(const MetricsReport& report);
MetricsReport report_details_from_json(const std::string& text);

/// Table rendering of an optional metric: the value, or "N/A".
std::string format_metric(const std::optional<double>& value, int precision = 6);

/// CSV with columns f1..fM and, when `with_inputs`, x1..xD.
void write_front_csv(const std::filesystem::path& path, const ParetoFront& front,
                     bool with_inputs);
ParetoFront read_front_csv(const std::filesystem::path& path);

}  // namespace invdoe::pareto
