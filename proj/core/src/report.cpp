#include "qjudge/report.hpp"

#include <cstdio>
#include <map>

#include "qjudge/error.hpp"

namespace qjudge {

namespace {

void require_rows(const TableSpec& table) {
  if (table.rows.empty()) throw Error(Errc::EmptyTable, "table '" + table.title + "' has no rows");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Markdown cell text with pipes escaped.
std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw Error(Errc::MalformedRecord, "csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string render_markdown(const TableSpec& table) {
  require_rows(table);
  // Column maxima per group, compared on the printed value.
  std::map<std::string, std::array<std::optional<double>, kMetricCount>> best;
  for (const auto& row : table.rows) {
    if (row.group.empty()) continue;
    auto& b = best[row.group];
    for (std::size_t c = 0; c < kMetricCount; ++c) {
      if (!row.values[c]) continue;
      const double shown = std::stod(format_value(*row.values[c]));
      if (!b[c] || shown > *b[c]) b[c] = shown;
    }
  }

  std::string out;
  if (!table.title.empty()) out += "## " + table.title + "\n\n";
  out += "| " + md_cell(table.label_header) + " | " + md_cell(table.group_header) + " |";
  for (MetricKind m : kAllMetrics) out += " " + std::string(metric_short_label(m)) + " |";
  out += "\n|---|---|";
  for (std::size_t c = 0; c < kMetricCount; ++c) out += "---:|";
  out += '\n';
  for (const auto& row : table.rows) {
    out += "| " + md_cell(row.label) + " | " + md_cell(row.group) + " |";
    for (std::size_t c = 0; c < kMetricCount; ++c) {
      if (!row.values[c]) {
        out += " n/a |";
        continue;
      }
      const std::string text = format_value(*row.values[c]);
      const bool top = !row.group.empty() && best[row.group][c] &&
                       std::stod(text) == *best[row.group][c];
      out += top ? " **" + text + "** |" : " " + text + " |";
    }
    out += '\n';
  }
  return out;
}

std::string render_csv(const TableSpec& table) {
  require_rows(table);
  std::string out = "label,group";
  for (MetricKind m : kAllMetrics) out += "," + std::string(metric_short_label(m));
  out += '\n';
  for (const auto& row : table.rows) {
    out += csv_field(row.label) + "," + csv_field(row.group);
    for (const auto& v : row.values) {
      out += ',';
      if (v) out += format_value(*v);
    }
    out += '\n';
  }
  return out;
}

TableSpec parse_csv(const std::string& text) {
  const auto records = parse_csv_records(text);
  if (records.empty()) throw Error(Errc::MalformedRecord, "csv: no header");
  TableSpec table;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != 2 + kMetricCount) {
      throw Error(Errc::MalformedRecord, "csv: record " + std::to_string(r + 1) + " has " +
                                             std::to_string(rec.size()) + " fields");
    }
    TableRow row{rec[0], rec[1], {}};
    for (std::size_t c = 0; c < kMetricCount; ++c) {
      const auto& f = rec[2 + c];
      if (f.empty()) continue;
      try {
        std::size_t used = 0;
        row.values[c] = std::stod(f, &used);
        if (used != f.size()) throw std::invalid_argument(f);
      } catch (const std::exception&) {
        throw Error(Errc::MalformedRecord, "csv: bad number '" + f + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace qjudge
