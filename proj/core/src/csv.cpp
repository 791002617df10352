#include "csv.hpp"

#include <boost/tokenizer.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "invdoe/common.hpp"

namespace invdoe::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  boost::escaped_list_separator<char> sep('\\', ',', '"');
  Tokenizer tok(line, sep);
  return {tok.begin(), tok.end()};
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Table parse(const std::string& text) {
  std::istringstream in(text);
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (line.empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split(line);
    } catch (const boost::escaped_list_error&) {
      if (!have_header) throw Error("csv: malformed header");
      fields = {};  // kept as a malformed row so loaders can count it
    }
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw Error("csv: missing header row");
  return table;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::optional<double> parse_number(const std::string& field) {
  std::size_t begin = field.find_first_not_of(" \t");
  std::size_t end = field.find_last_not_of(" \t");
  if (begin == std::string::npos) return std::nullopt;
  const char* first = field.data() + begin;
  const char* last = field.data() + end + 1;
  if (*first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (char c : f) {
        if (c == '"') out += '\\';
        out += c;
      }
      out += '"';
    } else {
      out += f;
    }
  }
  return out;
}

}  // namespace invdoe::csv
