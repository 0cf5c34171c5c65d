#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pairsel {

/// Numeric table with missing cells, as read from CSV.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> rows;

  std::size_t column_index(const std::string& name) const;  // throws DataError if absent
};

struct CsvOptions {
  /// Cells equal to this token (case-sensitive) or empty are missing.
  std::string na_marker = "NA";
  char delimiter = ',';
};

/// Parses a header line plus numeric rows. A cell that is neither numeric nor
/// a missing marker raises DataError naming the 1-based line and the column.
Table read_csv(std::istream& in, const CsvOptions& options = {});
Table read_csv_file(const std::string& path, const CsvOptions& options = {});

/// Writes a table back out, missing cells as the NA marker, numbers with 17 significant digits.
void write_csv(std::ostream& out, const Table& table, const CsvOptions& options = {});

/// Shortest-safe decimal form with 17 significant digits (exact round trip).
std::string format_double(double v);

/// Strict parse of a full token as a double; nullopt on failure.
std::optional<double> parse_double(const std::string& token);

}  // namespace pairsel
