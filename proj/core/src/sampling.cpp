#include "invdoe/sampling.hpp"

#include <boost/random/sobol.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace invdoe::sampling {

struct QuasiRandom::Impl {
  Impl(std::size_t d, std::uint64_t seed) : dim(d), engine(d), shift(d) {
    std::mt19937_64 rng(derive_seed(seed, 0x51));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& s : shift) s = unit(rng);
  }

  std::size_t dim;
  boost::random::sobol engine;
  Vector shift;
};

QuasiRandom::QuasiRandom(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error("QuasiRandom: dimension must be positive");
  impl_ = std::make_unique<Impl>(dim, seed);
}

QuasiRandom::~QuasiRandom() = default;
QuasiRandom::QuasiRandom(QuasiRandom&&) noexcept = default;
QuasiRandom& QuasiRandom::operator=(QuasiRandom&&) noexcept = default;

std::size_t QuasiRandom::dim() const { return impl_->dim; }

void QuasiRandom::next(std::span<double> out) {
  check_same_dimension(out.size(), impl_->dim, "QuasiRandom::next");
  // boost's sobol emits one coordinate per call, dimension-major.
  const double scale = 1.0 / (static_cast<double>(impl_->engine.max()) + 1.0);
  for (std::size_t d = 0; d < impl_->dim; ++d) {
    const double u = static_cast<double>(impl_->engine()) * scale + impl_->shift[d];
    out[d] = u - std::floor(u);
  }
}

Vector QuasiRandom::next() {
  Vector out(impl_->dim);
  next(out);
  return out;
}

Vector standard_normals(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out(count);
  for (auto& v : out) v = normal(rng);
  return out;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace invdoe::sampling
