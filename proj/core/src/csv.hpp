#pragma once

// Minimal CSV reading/writing shared by the front and dataset loaders.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace invdoe::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

/// Reads a comma-separated file with a header row. Quoted fields are honoured;
/// header names are kept verbatim (no trimming).
Table read(const std::filesystem::path& path);
Table parse(const std::string& text);

std::optional<double> parse_number(const std::string& field);

std::string format_number(double value);

std::string join_row(const std::vector<std::string>& fields);

}  // namespace invdoe::csv
