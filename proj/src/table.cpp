#include "pairsel/table.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pairsel/error.hpp"

namespace pairsel {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) return j;
  throw DataError("unknown column '" + name + "'");
}

std::optional<double> parse_double(const std::string& token) {
  if (token.empty()) return std::nullopt;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::general, 17);
  if (ec != std::errc()) throw InvalidArgument("number formatting failed");
  return std::string(buf.data(), ptr);
}

Table read_csv(std::istream& in, const CsvOptions& options) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (line_no == 0 || trim(line).empty()) throw DataError("empty CSV input");
  for (auto& name : split(line, options.delimiter)) table.names.push_back(unquote(name));
  if (table.names.empty()) throw DataError("CSV header has no columns");

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, options.delimiter);
    if (cells.size() != table.names.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.names.size()) + " cells, found " +
                      std::to_string(cells.size()));
    std::vector<std::optional<double>> row;
    row.reserve(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string cell = unquote(cells[j]);
      if (cell.empty() || cell == options.na_marker) {
        row.emplace_back(std::nullopt);
        continue;
      }
      auto v = parse_double(cell);
      if (!v || !std::isfinite(*v))
        throw DataError("line " + std::to_string(line_no) + ", column '" + table.names[j] +
                        "': cannot parse '" + cell + "' as a number");
      row.emplace_back(*v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table read_csv_file(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return read_csv(in, options);
}

void write_csv(std::ostream& out, const Table& table, const CsvOptions& options) {
  for (std::size_t j = 0; j < table.names.size(); ++j) {
    if (j) out << options.delimiter;
    out << table.names[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << options.delimiter;
      out << (row[j] ? format_double(*row[j]) : options.na_marker);
    }
    out << '\n';
  }
}

}  // namespace pairsel
