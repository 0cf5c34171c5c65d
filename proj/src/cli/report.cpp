#include "pairsel/cli/report.hpp"

#include <json.hpp>
#include <sstream>

#include "pairsel/error.hpp"
#include "pairsel/table.hpp"

namespace pairsel::cli {

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, cell);
}

}  // namespace

void Report::set(const std::string& key, const std::string& value) {
  if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos)
    throw InvalidArgument("report header entries must be single-line and keys cannot contain '='");
  for (auto& [k, v] : header)
    if (k == key) {
      v = value;
      return;
    }
  header.emplace_back(key, value);
}

void Report::set(const std::string& key, double value) { set(key, format_double(value)); }
void Report::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }

const std::string& Report::get(const std::string& key) const {
  for (const auto& [k, v] : header)
    if (k == key) return v;
  throw InvalidArgument("report has no header entry '" + key + "'");
}

const ReportTable& Report::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return t;
  throw InvalidArgument("report has no table '" + name + "'");
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw InvalidArgument("unknown format '" + name + "' (expected csv or json)");
}

std::string cell_text(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::to_string(std::get<std::int64_t>(cell));
}

void write_report(std::ostream& out, const Report& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    nlohmann::ordered_json doc;
    doc["header"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.header) doc["header"][k] = v;
    doc["tables"] = nlohmann::ordered_json::object();
    for (const auto& t : report.tables) {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& row : t.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::object();
        for (std::size_t j = 0; j < t.columns.size(); ++j) r[t.columns[j]] = cell_json(row[j]);
        rows.push_back(std::move(r));
      }
      doc["tables"][t.name] = std::move(rows);
    }
    out << doc.dump(2) << '\n';
    return;
  }
  for (const auto& [k, v] : report.header) out << "# " << k << '=' << v << '\n';
  for (const auto& t : report.tables) {
    out << "## table=" << t.name << '\n';
    for (std::size_t j = 0; j < t.columns.size(); ++j) out << (j ? "," : "") << quote_if_needed(t.columns[j]);
    out << '\n';
    for (const auto& row : t.rows) {
      if (row.size() != t.columns.size()) throw InvalidArgument("ragged report table '" + t.name + "'");
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << quote_if_needed(cell_text(row[j]));
      out << '\n';
    }
  }
}

Report read_report(std::istream& in) {
  Report report;
  std::string line;
  ReportTable* current = nullptr;
  bool want_columns = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (quoted) {
        if (c == '"' && i + 1 < s.size() && s[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(std::move(cell));
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(std::move(cell));
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.rfind("## table=", 0) == 0) {
      report.tables.push_back({line.substr(9), {}, {}});
      current = &report.tables.back();
      want_columns = true;
    } else if (line.rfind("# ", 0) == 0 && !current) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw DataError("malformed report header line: " + line);
      report.header.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
    } else if (current && want_columns) {
      current->columns = split(line);
      want_columns = false;
    } else if (current) {
      std::vector<Cell> row;
      for (auto& c : split(line)) row.emplace_back(std::move(c));
      if (row.size() != current->columns.size()) throw DataError("ragged row in report table " + current->name);
      current->rows.push_back(std::move(row));
    } else if (!line.empty()) {
      throw DataError("unexpected line before the first table: " + line);
    }
  }
  return report;
}

}  // namespace pairsel::cli
