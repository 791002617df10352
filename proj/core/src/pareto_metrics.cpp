#include "invdoe/pareto_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "csv.hpp"
#include "invdoe/sampling.hpp"
#include "json.hpp"

namespace invdoe::pareto {

using ojson = nlohmann::ordered_json;

Vector to_minimization(std::span<const double> values, std::span<const Sense> senses) {
  check_same_dimension(values.size(), senses.size(), "to_minimization");
  Vector out(values.begin(), values.end());
  for (std::size_t m = 0; m < out.size(); ++m) {
    if (senses[m] == Sense::Maximize) out[m] = -out[m];
  }
  return out;
}

Vector from_minimization(std::span<const double> values, std::span<const Sense> senses) {
  // negation is its own inverse
  return to_minimization(values, senses);
}

std::vector<Vector> objectives_of(const ParetoFront& front) {
  std::vector<Vector> out;
  out.reserve(front.size());
  for (const auto& m : front) out.push_back(m.f);
  return out;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
  check_same_dimension(a.size(), b.size(), "dominates");
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

bool weakly_dominates(std::span<const double> a, std::span<const double> b) {
  check_same_dimension(a.size(), b.size(), "weakly_dominates");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

namespace {

bool within_tolerance(const Vector& a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > kDuplicateTolerance) return false;
  }
  return true;
}

std::size_t common_dimension(const std::vector<Vector>& points, const char* what) {
  if (points.empty()) return 0;
  const std::size_t m = points.front().size();
  for (const auto& p : points) check_same_dimension(p.size(), m, what);
  return m;
}

// Flags points strictly dominated by some other point. Exact duplicates are
// never flagged (neither strictly dominates the other).
std::vector<char> dominated_flags_quadratic(const std::vector<Vector>& pts) {
  const std::size_t n = pts.size();
  std::vector<char> dominated(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && !dominated[i]; ++j) {
      if (j != i && dominates(pts[j], pts[i])) dominated[i] = 1;
    }
  }
  return dominated;
}

std::vector<std::size_t> lexicographic_order(const std::vector<Vector>& pts) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pts[a] < pts[b]; });
  return order;
}

std::vector<char> dominated_flags_2d(const std::vector<Vector>& pts) {
  const auto order = lexicographic_order(pts);
  std::vector<char> dominated(pts.size(), 0);
  double best_f2 = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  while (k < order.size()) {
    // group of equal f1; within it only the minimum f2 can survive
    const double f1 = pts[order[k]][0];
    const double group_min = pts[order[k]][1];
    std::size_t end = k;
    while (end < order.size() && pts[order[end]][0] == f1) ++end;
    for (std::size_t i = k; i < end; ++i) {
      const double f2 = pts[order[i]][1];
      if (f2 != group_min || !(group_min < best_f2)) dominated[order[i]] = 1;
    }
    best_f2 = std::min(best_f2, group_min);
    k = end;
  }
  return dominated;
}

std::vector<char> dominated_flags_3d(const std::vector<Vector>& pts) {
  const auto order = lexicographic_order(pts);
  std::vector<char> dominated(pts.size(), 0);
  // Staircase of minimal (f2, f3) among processed points: f3 strictly
  // decreasing as f2 increases.
  std::map<double, double> stair;
  auto weakly_covered = [&](double f2, double f3) {
    auto it = stair.upper_bound(f2);
    if (it == stair.begin()) return false;
    --it;
    return it->second <= f3;
  };
  auto insert = [&](double f2, double f3) {
    if (weakly_covered(f2, f3)) return;
    auto it = stair.lower_bound(f2);
    while (it != stair.end() && it->second >= f3) it = stair.erase(it);
    stair[f2] = f3;
  };
  std::size_t k = 0;
  while (k < order.size()) {
    // group of identical vectors: query before inserting so duplicates do
    // not knock each other out
    std::size_t end = k + 1;
    while (end < order.size() && pts[order[end]] == pts[order[k]]) ++end;
    const auto& p = pts[order[k]];
    const bool covered = weakly_covered(p[1], p[2]);
    for (std::size_t i = k; i < end; ++i) dominated[order[i]] = covered ? 1 : 0;
    if (!covered) insert(p[1], p[2]);
    k = end;
  }
  return dominated;
}

}  // namespace

std::vector<std::size_t> nondominated_indices(const std::vector<Vector>& points) {
  const std::size_t m = common_dimension(points, "pareto_filter");
  if (points.empty()) return {};
  for (const auto& p : points) {
    for (double v : p) {
      if (!std::isfinite(v)) throw Error("pareto_filter: non-finite objective value");
    }
  }
  std::vector<char> dominated;
  if (m == 2) {
    dominated = dominated_flags_2d(points);
  } else if (m == 3) {
    dominated = dominated_flags_3d(points);
  } else {
    dominated = dominated_flags_quadratic(points);
  }

  // Collapse within-tolerance duplicates among survivors, first occurrence
  // wins. Candidates are looked up by f1 window.
  std::vector<std::size_t> kept;
  std::multimap<double, std::size_t> by_first;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (dominated[i]) continue;
    const auto& p = points[i];
    bool duplicate = false;
    auto lo = by_first.lower_bound(p[0] - kDuplicateTolerance);
    for (auto it = lo; it != by_first.end() && it->first <= p[0] + kDuplicateTolerance; ++it) {
      if (within_tolerance(points[it->second], p)) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    kept.push_back(i);
    by_first.emplace(p[0], i);
  }
  return kept;
}

ParetoFront pareto_filter(const std::vector<FrontMember>& points) {
  std::vector<Vector> objectives;
  objectives.reserve(points.size());
  for (const auto& p : points) objectives.push_back(p.f);
  ParetoFront out;
  for (std::size_t i : nondominated_indices(objectives)) out.push_back(points[i]);
  return out;
}

std::vector<Vector> pareto_filter(const std::vector<Vector>& points) {
  std::vector<Vector> out;
  for (std::size_t i : nondominated_indices(points)) out.push_back(points[i]);
  return out;
}

namespace {

double euclidean(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double mean_min_distance(const std::vector<Vector>& from, const std::vector<Vector>& to) {
  double total = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, euclidean(p, q));
    total += best;
  }
  return total / static_cast<double>(from.size());
}

void check_metric_inputs(const std::vector<Vector>& front, const ReferenceFront& ref,
                         const char* name) {
  if (front.empty()) throw UndefinedMetricError("undefined metric: empty front");
  if (ref.empty()) throw UndefinedMetricError("undefined metric: empty reference front");
  const std::size_t m = common_dimension(front, name);
  check_same_dimension(common_dimension(ref, name), m, name);
}

}  // namespace

double gd(const std::vector<Vector>& front, const ReferenceFront& ref) {
  check_metric_inputs(front, ref, "gd");
  return mean_min_distance(front, ref);
}

double igd(const std::vector<Vector>& front, const ReferenceFront& ref) {
  check_metric_inputs(front, ref, "igd");
  return mean_min_distance(ref, front);
}

namespace {

// Points must all weakly dominate r. Sorted sweep over f1.
double hv2d(std::vector<Vector> pts, std::span<const double> r) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double ceiling = r[1];
  for (const auto& p : pts) {
    if (p[1] < ceiling) {
      area += (r[0] - p[0]) * (ceiling - p[1]);
      ceiling = p[1];
    }
  }
  return area;
}

// Slices along the last objective and recurses on the projected prefix.
double hv_slicing(std::vector<Vector> pts, std::span<const double> r) {
  const std::size_t m = r.size();
  if (pts.empty()) return 0.0;
  if (m == 1) {
    double best = r[0];
    for (const auto& p : pts) best = std::min(best, p[0]);
    return r[0] - best;
  }
  if (m == 2) return hv2d(std::move(pts), r);
  std::sort(pts.begin(), pts.end(),
            [m](const Vector& a, const Vector& b) { return a[m - 1] < b[m - 1]; });
  double volume = 0.0;
  std::vector<Vector> prefix;
  prefix.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    prefix.emplace_back(pts[i].begin(), pts[i].end() - 1);
    const double z = pts[i][m - 1];
    const double z_next = i + 1 < pts.size() ? pts[i + 1][m - 1] : r[m - 1];
    if (z_next > z) {
      prefix = pareto_filter(prefix);
      volume += hv_slicing(prefix, r.first(m - 1)) * (z_next - z);
    }
  }
  return volume;
}

HypervolumeResult hv_monte_carlo(const std::vector<Vector>& pts, std::span<const double> r) {
  const std::size_t m = r.size();
  Vector lower(r.begin(), r.end());
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < m; ++i) lower[i] = std::min(lower[i], p[i]);
  }
  double box = 1.0;
  for (std::size_t i = 0; i < m; ++i) box *= r[i] - lower[i];
  if (box <= 0.0) return {0.0, 0.0, false};
  sampling::QuasiRandom qrng(m, 0);
  Vector u(m), s(m);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < kMonteCarloHvSamples; ++k) {
    qrng.next(u);
    for (std::size_t i = 0; i < m; ++i) s[i] = lower[i] + u[i] * (r[i] - lower[i]);
    for (const auto& p : pts) {
      if (weakly_dominates(p, s)) {
        ++hits;
        break;
      }
    }
  }
  const double n = static_cast<double>(kMonteCarloHvSamples);
  const double frac = static_cast<double>(hits) / n;
  return {frac * box, box * std::sqrt(frac * (1.0 - frac) / n), false};
}

}  // namespace

HypervolumeResult hypervolume_detailed(const std::vector<Vector>& front,
                                       std::span<const double> reference) {
  if (front.empty()) return {};
  const std::size_t m = common_dimension(front, "hypervolume");
  check_same_dimension(reference.size(), m, "hypervolume");
  std::vector<Vector> contributing;
  for (const auto& p : front) {
    if (!weakly_dominates(p, reference)) {
      throw InvalidReferencePointError("invalid reference point");
    }
    bool strictly_inside = true;
    for (std::size_t i = 0; i < m; ++i) strictly_inside &= p[i] < reference[i];
    if (strictly_inside) contributing.push_back(p);
  }
  if (contributing.empty()) return {};
  contributing = pareto_filter(contributing);
  if (m <= 4) return {hv_slicing(std::move(contributing), reference), 0.0, true};
  return hv_monte_carlo(contributing, reference);
}

double hypervolume(const std::vector<Vector>& front, std::span<const double> reference) {
  return hypervolume_detailed(front, reference).value;
}

std::optional<double> spacing(const std::vector<Vector>& front) {
  const std::size_t n = front.size();
  if (n < 2) return std::nullopt;
  common_dimension(front, "spacing");
  Vector nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) nearest[i] = std::min(nearest[i], euclidean(front[i], front[j]));
    }
  }
  const double mean = std::accumulate(nearest.begin(), nearest.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : nearest) ss += (d - mean) * (d - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double max_spread(const std::vector<Vector>& front) {
  if (front.empty()) throw UndefinedMetricError("undefined metric: empty front");
  const std::size_t m = common_dimension(front, "max_spread");
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double lo = front[0][i], hi = front[0][i];
    for (const auto& p : front) {
      lo = std::min(lo, p[i]);
      hi = std::max(hi, p[i]);
    }
    total += (hi - lo) * (hi - lo);
  }
  return std::sqrt(total);
}

Vector default_reference_point(const std::vector<Vector>& front, const ReferenceFront& ref) {
  std::vector<Vector> all = front;
  all.insert(all.end(), ref.begin(), ref.end());
  if (all.empty()) throw UndefinedMetricError("default reference point: no points");
  const std::size_t m = common_dimension(all, "default_reference_point");
  Vector r(m);
  for (std::size_t i = 0; i < m; ++i) {
    double lo = all[0][i], hi = all[0][i];
    for (const auto& p : all) {
      lo = std::min(lo, p[i]);
      hi = std::max(hi, p[i]);
    }
    r[i] = hi + std::max(0.1 * (hi - lo), 1e-6);
  }
  return r;
}

namespace {

template <typename F>
auto with_metric_name(const char* name, F&& f) {
  try {
    return f();
  } catch (const InvalidReferencePointError& e) {
    throw InvalidReferencePointError(std::string(name) + ": " + e.what());
  } catch (const UndefinedMetricError& e) {
    throw UndefinedMetricError(std::string(name) + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

MetricsReport metrics_report(const std::vector<Vector>& front, const ReferenceFront& ref,
                             std::optional<Vector> reference_point, HvPolicy policy) {
  MetricsReport report;
  report.pareto_size = front.size();
  report.reference_point =
      reference_point ? *reference_point : default_reference_point(front, ref);
  report.gd = with_metric_name("gd", [&] { return gd(front, ref); });
  report.igd = with_metric_name("igd", [&] { return igd(front, ref); });
  const auto hv = with_metric_name("hv", [&] {
    if (policy == HvPolicy::Strict) return hypervolume_detailed(front, report.reference_point);
    std::vector<Vector> inside;
    for (const auto& p : front) {
      check_same_dimension(p.size(), report.reference_point.size(), "hypervolume");
      if (weakly_dominates(p, report.reference_point)) inside.push_back(p);
    }
    return hypervolume_detailed(inside, report.reference_point);
  });
  report.hv = hv.value;
  report.hv_std_error = hv.std_error;
  report.spacing = with_metric_name("sp", [&] { return spacing(front); });
  report.max_spread = with_metric_name("ms", [&] { return max_spread(front); });
  return report;
}

namespace {

ojson optional_number(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

ojson report_document(const MetricsReport& report) {
  ojson doc;
  if (report.has_metrics()) {
    ojson metrics;
    metrics["generational_distance_gd"] = optional_number(report.gd);
    metrics["hypervolume_hv"] = optional_number(report.hv);
    metrics["inverted_generational_distance_igd"] = optional_number(report.igd);
    metrics["maximum_spread_ms"] = optional_number(report.max_spread);
    metrics["spacing_sp"] = optional_number(report.spacing);
    doc["metrics"] = std::move(metrics);
  } else {
    doc["metrics"] = nullptr;
  }
  doc["pareto_size"] = report.pareto_size;
  doc["status"] = "success";
  if (report.warning) doc["warning"] = *report.warning;
  return doc;
}

MetricsReport parse_report_document(const nlohmann::json& doc) {
  MetricsReport report;
  if (doc.contains("metrics") && !doc.at("metrics").is_null()) {
    const auto& m = doc.at("metrics");
    report.gd = read_optional(m, "generational_distance_gd");
    report.hv = read_optional(m, "hypervolume_hv");
    report.igd = read_optional(m, "inverted_generational_distance_igd");
    report.max_spread = read_optional(m, "maximum_spread_ms");
    report.spacing = read_optional(m, "spacing_sp");
  }
  report.pareto_size = doc.value("pareto_size", std::size_t{0});
  if (doc.contains("warning")) report.warning = doc.at("warning").get<std::string>();
  return report;
}

}  // namespace

std::string report_to_json(const MetricsReport& report, int indent) {
  return report_document(report).dump(indent);
}

MetricsReport report_from_json(const std::string& text) {
  return parse_report_document(nlohmann::json::parse(text));
}

std::string report_details_to_json(const MetricsReport& report) {
  ojson doc = report_document(report);
  doc["reference_point"] = report.reference_point;
  doc["hv_std_error"] = report.hv_std_error;
  return doc.dump(2);
}

MetricsReport report_details_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  MetricsReport report = parse_report_document(doc);
  if (doc.contains("reference_point")) {
    report.reference_point = doc.at("reference_point").get<Vector>();
  }
  report.hv_std_error = doc.value("hv_std_error", 0.0);
  return report;
}

std::string format_metric(const std::optional<double>& value, int precision) {
  if (!value) return "N/A";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, *value);
  return buf;
}

void write_front_csv(const std::filesystem::path& path, const ParetoFront& front,
                     bool with_inputs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  const std::size_t m = front.empty() ? 0 : front.front().f.size();
  const std::size_t d = (with_inputs && !front.empty()) ? front.front().x.size() : 0;
  std::vector<std::string> header;
  for (std::size_t i = 0; i < m; ++i) header.push_back("f" + std::to_string(i + 1));
  for (std::size_t i = 0; i < d; ++i) header.push_back("x" + std::to_string(i + 1));
  out << csv::join_row(header) << '\n';
  for (const auto& member : front) {
    std::vector<std::string> row;
    for (double v : member.f) row.push_back(csv::format_number(v));
    for (std::size_t i = 0; i < d; ++i) row.push_back(csv::format_number(member.x[i]));
    out << csv::join_row(row) << '\n';
  }
}

ParetoFront read_front_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  std::vector<std::size_t> f_cols, x_cols;
  for (std::size_t k = 1;; ++k) {
    auto it = std::find(table.header.begin(), table.header.end(), "f" + std::to_string(k));
    if (it == table.header.end()) break;
    f_cols.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  for (std::size_t k = 1;; ++k) {
    auto it = std::find(table.header.begin(), table.header.end(), "x" + std::to_string(k));
    if (it == table.header.end()) break;
    x_cols.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  if (f_cols.empty()) throw NotFoundError("front csv: missing column 'f1'");
  ParetoFront front;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    FrontMember member;
    auto read_cols = [&](const std::vector<std::size_t>& cols, Vector& dst) {
      for (std::size_t c : cols) {
        auto v = c < row.size() ? csv::parse_number(row[c]) : std::nullopt;
        if (!v) {
          throw Error("front csv: bad value on line " + std::to_string(table.line_numbers[r]));
        }
        dst.push_back(*v);
      }
    };
    read_cols(f_cols, member.f);
    read_cols(x_cols, member.x);
    front.push_back(std::move(member));
  }
  return front;
}

}  // namespace invdoe::pareto
