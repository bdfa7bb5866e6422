#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qjudge/metrics.hpp"

namespace qjudge {

struct TableRow {
  std::string label;
  /// Rows sharing a non-empty group compete for highlighting; rows with an
  /// empty group are never highlighted.
  std::string group;
  /// One value per metric column; empty prints as "n/a".
  std::array<std::optional<double>, kMetricCount> values;

  friend bool operator==(const TableRow&, const TableRow&) = default;
};

/// A metrics table with columns Gram, App, Rel, Nov, Com.
struct TableSpec {
  std::string title;
  std::string label_header = "Model";
  std::string group_header = "Approach";
  std::vector<TableRow> rows;
};

/// Value as printed in both renderings: fixed, two decimals.
std::string format_value(double v);

/// Heading plus pipe table. Within each group, every cell whose printed
/// value equals the column maximum is wrapped in ** (ties all marked).
/// Throws EmptyTable.
std::string render_markdown(const TableSpec& table);

/// Header "label,group,Gram,App,Rel,Nov,Com" and one line per row; fields
/// containing comma, quote, CR or LF are quoted with "" escaping. Missing
/// values are empty fields. Throws EmptyTable.
std::string render_csv(const TableSpec& table);

/// Reads render_csv output back (title and headers are not recovered).
/// Throws MalformedRecord.
TableSpec parse_csv(const std::string& text);

}  // namespace qjudge
