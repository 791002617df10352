#include "invdoe/common.hpp"

namespace invdoe {

std::string to_string(Sense sense) {
  return sense == Sense::Minimize ? "minimize" : "maximize";
}

Sense sense_from_string(const std::string& text) {
  if (text == "minimize" || text == "min") return Sense::Minimize;
  if (text == "maximize" || text == "max") return Sense::Maximize;
  throw Error("unknown objective sense '" + text + "'");
}

void check_same_dimension(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace invdoe
