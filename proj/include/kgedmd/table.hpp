#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgedmd/types.hpp"

namespace kgedmd {

/// Numeric result table; NaN marks an absent value and is written as an empty field.
///
/// CSV layout: a `# schema=<schema> config_digest=<digest>` line, the header row,
/// then one row per record with the config digest repeated in the last column.
struct ResultTable {
  std::string schema;
  std::string config_digest;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  Index column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;

  /// NaN compares equal to NaN.
  bool operator==(const ResultTable& other) const;
};

std::string to_csv(const ResultTable& table);
ResultTable from_csv(const std::string& text);
void export_results(const ResultTable& table, const std::filesystem::path& path);
ResultTable load_results(const std::filesystem::path& path);

}  // namespace kgedmd
