#include "kgedmd/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "kgedmd/errors.hpp"

namespace kgedmd {

namespace {

constexpr const char* kDigestColumn = "config_digest";

void append_number(std::string& out, double v) {
  if (std::isnan(v)) return;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(current);
  return fields;
}

double parse_number(const std::string& field, std::size_t line) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError("line " + std::to_string(line) + ": not a number: '" + field + "'", line);
  }
  return v;
}

bool same(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return a == b;
}

}  // namespace

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw ArgumentError("ResultTable: row has " + std::to_string(row.size()) + " fields, expected " +
                        std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

Index ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<Index>(i);
  }
  throw ArgumentError("ResultTable: no column '" + name + "'");
}

std::vector<double> ResultTable::column_values(const std::string& name) const {
  const auto c = static_cast<std::size_t>(column(name));
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

bool ResultTable::operator==(const ResultTable& other) const {
  if (schema != other.schema || config_digest != other.config_digest || columns != other.columns ||
      rows.size() != other.rows.size()) {
    return false;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != other.rows[i].size()) return false;
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (!same(rows[i][j], other.rows[i][j])) return false;
    }
  }
  return true;
}

std::string to_csv(const ResultTable& table) {
  std::string out = "# schema=" + table.schema + " config_digest=" + table.config_digest + "\n";
  for (const auto& c : table.columns) out += c + ",";
  out += kDigestColumn;
  out += "\n";
  for (const auto& row : table.rows) {
    for (double v : row) {
      append_number(out, v);
      out += ",";
    }
    out += table.config_digest + "\n";
  }
  return out;
}

ResultTable from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  ResultTable table;

  if (!std::getline(in, line)) throw ParseError("empty result file", 1);
  ++number;
  if (line.rfind("# ", 0) != 0) throw ParseError("line 1: missing '# schema=...' metadata line", 1);
  std::istringstream meta(line.substr(2));
  std::string token;
  bool has_schema = false;
  while (meta >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ParseError("line 1: malformed metadata '" + token + "'", 1);
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "schema") {
      table.schema = value;
      has_schema = true;
    } else if (key == kDigestColumn) {
      table.config_digest = value;
    }
  }
  if (!has_schema) throw ParseError("line 1: metadata has no schema", 1);

  if (!std::getline(in, line)) throw ParseError("line 2: missing header row", 2);
  ++number;
  table.columns = split(line);
  if (table.columns.empty() || table.columns.back() != kDigestColumn) {
    throw ParseError("line 2: header must end with the config_digest column", 2);
  }
  table.columns.pop_back();

  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != table.columns.size() + 1) {
      throw ParseError("line " + std::to_string(number) + ": expected " +
                           std::to_string(table.columns.size() + 1) + " fields, found " +
                           std::to_string(fields.size()),
                       number);
    }
    if (fields.back() != table.config_digest) {
      throw ParseError("line " + std::to_string(number) + ": config digest differs from the file header",
                       number);
    }
    fields.pop_back();
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, number));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void export_results(const ResultTable& table, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_csv(table);
  if (!out) throw ConfigError("failed writing " + path.string());
}

ResultTable load_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str());
}

}  // namespace kgedmd
