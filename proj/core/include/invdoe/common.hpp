#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace invdoe {

using Vector = std::vector<double>;

/// Direction of an objective. The library compares everything in the
/// minimization convention; maximize entries are negated on ingestion.
enum class Sense { Minimize, Maximize };

std::string to_string(Sense sense);
Sense sense_from_string(const std::string& text);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class InvalidReferencePointError : public Error {
 public:
  using Error::Error;
};

class IllConditionedError : public Error {
 public:
  using Error::Error;
};

class InfeasibleRegionError : public Error {
 public:
  using Error::Error;
};

class DivergedError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// SplitMix64 mixing of (base, stream, index) into an independent seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1) +
                    0xBF58476D1CE4E5B9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_same_dimension(std::size_t a, std::size_t b, const char* what);

}  // namespace invdoe
