#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include "invdoe/common.hpp"

namespace invdoe::sampling {

/// Sobol sequence in [0,1)^dim with a seeded Cranley-Patterson rotation, so
/// distinct seeds give distinct but equally well-spread point sets.
class QuasiRandom {
 public:
  QuasiRandom(std::size_t dim, std::uint64_t seed);
  ~QuasiRandom();
  QuasiRandom(QuasiRandom&&) noexcept;
  QuasiRandom& operator=(QuasiRandom&&) noexcept;

  std::size_t dim() const;
  void next(std::span<double> out);
  Vector next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// `count` iid standard-normal draws from a seeded mt19937_64.
Vector standard_normals(std::size_t count, std::uint64_t seed);

double normal_pdf(double z);
double normal_cdf(double z);

}  // namespace invdoe::sampling
