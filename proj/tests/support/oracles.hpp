#pragma once

// Slow, direct reference implementations used only as test oracles. None of
// these share code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Point = std::vector<double>;

inline bool dominates(const Point& a, const Point& b) {
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

// O(n^2) nondominated indices; exact duplicates keep their first occurrence.
inline std::vector<std::size_t> nondominated(const std::vector<Point>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < pts.size() && keep; ++j) {
      if (j == i) continue;
      if (dominates(pts[j], pts[i])) keep = false;
      if (j < i && pts[j] == pts[i]) keep = false;
    }
    if (keep) out.push_back(i);
  }
  return out;
}

// Inclusion-exclusion over all non-empty subsets; fine up to ~16 points.
inline double hv_inclusion_exclusion(const std::vector<Point>& front, const Point& ref) {
  const std::size_t n = front.size();
  const std::size_t m = ref.size();
  double total = 0.0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    Point corner(m, -std::numeric_limits<double>::infinity());
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      ++bits;
      for (std::size_t k = 0; k < m; ++k) corner[k] = std::max(corner[k], front[i][k]);
    }
    double vol = 1.0;
    for (std::size_t k = 0; k < m; ++k) vol *= std::max(0.0, ref[k] - corner[k]);
    total += (bits % 2 == 1 ? 1.0 : -1.0) * vol;
  }
  return total;
}

inline double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double mean_min_distance(const std::vector<Point>& from, const std::vector<Point>& to) {
  double s = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : to) best = std::min(best, distance(p, r));
    s += best;
  }
  return s / static_cast<double>(from.size());
}

inline std::optional<double> schott_spacing(const std::vector<Point>& f) {
  if (f.size() < 2) return std::nullopt;
  std::vector<double> d;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (i != j) best = std::min(best, distance(f[i], f[j]));
    }
    d.push_back(best);
  }
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(d.size() - 1));
}

inline double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
inline double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Hypervolume improvement of y over a 2-D front, by inclusion-exclusion.
inline double hvi_2d(const std::vector<Point>& front, const Point& y, const Point& ref) {
  if (y[0] >= ref[0] || y[1] >= ref[1]) return 0.0;
  std::vector<Point> with = front;
  with.push_back(y);
  return hv_inclusion_exclusion(with, ref) - hv_inclusion_exclusion(front, ref);
}

// EHVI for independent Gaussian objectives by midpoint quadrature on a
// (n x n) grid spanning +-8 sd.
inline double ehvi_quadrature_2d(const Point& mu, const Point& sd, const std::vector<Point>& front,
                                 const Point& ref, int n = 1500) {
  const double base = hv_inclusion_exclusion(front, ref);
  const double lo0 = mu[0] - 8 * sd[0], hi0 = std::min(mu[0] + 8 * sd[0], ref[0]);
  const double lo1 = mu[1] - 8 * sd[1], hi1 = std::min(mu[1] + 8 * sd[1], ref[1]);
  if (hi0 <= lo0 || hi1 <= lo1) return 0.0;
  const double h0 = (hi0 - lo0) / n, h1 = (hi1 - lo1) / n;
  double total = 0.0;
  std::vector<Point> with = front;
  with.push_back({0.0, 0.0});
  for (int i = 0; i < n; ++i) {
    const double y0 = lo0 + (i + 0.5) * h0;
    const double w0 = phi((y0 - mu[0]) / sd[0]) / sd[0];
    for (int j = 0; j < n; ++j) {
      const double y1 = lo1 + (j + 0.5) * h1;
      const double w1 = phi((y1 - mu[1]) / sd[1]) / sd[1];
      with.back() = {y0, y1};
      total += w0 * w1 * (hv_inclusion_exclusion(with, ref) - base);
    }
  }
  return total * h0 * h1;
}

// Closed-form EI for maximization; used against the library's version.
inline double expected_improvement(double mean, double sd, double best) {
  if (sd <= 0.0) return std::max(0.0, mean - best);
  const double z = (mean - best) / sd;
  return (mean - best) * Phi(z) + sd * phi(z);
}

// Textbook GP posterior via an explicit inverse. `k` is the kernel on unit
// inputs; targets already standardized, constant mean `m`.
struct NaiveGp {
  Eigen::MatrixXd kinv;
  Eigen::VectorXd alpha;
  std::vector<Point> xs;
  std::function<double(const Point&, const Point&)> k;
  double m = 0.0;

  NaiveGp(std::vector<Point> inputs, const Eigen::VectorXd& y, double mean, double noise,
          std::function<double(const Point&, const Point&)> kernel)
      : xs(std::move(inputs)), k(std::move(kernel)), m(mean) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) K(i, j) = k(xs[i], xs[j]);
    }
    K.diagonal().array() += noise;
    kinv = K.fullPivLu().inverse();
    alpha = kinv * (y.array() - m).matrix();
  }

  std::pair<double, double> operator()(const Point& x) const {
    Eigen::VectorXd ks(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) ks(static_cast<Eigen::Index>(i)) = k(xs[i], x);
    const double mean = m + ks.dot(alpha);
    const double var = k(x, x) - ks.dot(kinv * ks);
    return {mean, var};
  }
};

inline double matern52(const Point& a, const Point& b, const Point& ls, double s2) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r2 += (a[i] - b[i]) * (a[i] - b[i]) / (ls[i] * ls[i]);
  const double r = std::sqrt(5.0 * r2);
  return s2 * (1.0 + r + r * r / 3.0) * std::exp(-r);
}

inline double squared_exponential(const Point& a, const Point& b, const Point& ls, double s2) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r2 += (a[i] - b[i]) * (a[i] - b[i]) / (ls[i] * ls[i]);
  return s2 * std::exp(-0.5 * r2);
}

inline std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                        double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point> out(n, Point(m));
  for (auto& p : out) {
    for (auto& v : p) v = u(rng);
  }
  return out;
}

// Mutually nondominated 2-D points: sorted f1 ascending with f2 descending.
inline std::vector<Point> random_front_2d(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(n), b(n);
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end(), std::greater<>());
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({a[i], b[i]});
  return out;
}

}  // namespace oracle
