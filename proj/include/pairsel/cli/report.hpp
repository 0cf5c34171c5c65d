#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pairsel::cli {

using Cell = std::variant<std::string, double, std::int64_t>;

struct ReportTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Key-value header followed by one or more named rectangular tables.
///
/// Text form:
///   # key=value            (one line per header entry, in insertion order)
///   ## table=<name>        (starts a table; next line is the CSV column header)
///   a,b,c
///   ...
/// Numbers are written with 17 significant digits, so reading a report back
/// reproduces every value exactly.
struct Report {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<ReportTable> tables;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  const std::string& get(const std::string& key) const;
  const ReportTable& table(const std::string& name) const;
};

enum class ReportFormat { Csv, Json };
ReportFormat parse_report_format(const std::string& name);

std::string cell_text(const Cell& cell);

void write_report(std::ostream& out, const Report& report, ReportFormat format);

/// Reads the text form; every cell comes back as a string.
Report read_report(std::istream& in);

}  // namespace pairsel::cli
