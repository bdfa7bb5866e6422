#include "pipeline.hpp"

#include <map>
#include <sstream>

#include "json.hpp"
#include "qjudge/error.hpp"
#include "qjudge/report.hpp"
#include "qjudge/stats.hpp"

namespace qjudge::cli {

using nlohmann::json;

namespace {

json metric_values(const MeanVector& v) {
  json j = json::object();
  for (MetricKind m : kAllMetrics) j[std::string(metric_id(m))] = v[m];
  return j;
}

json metric_values(const ScoreVector& v) {
  json j = json::object();
  for (MetricKind m : kAllMetrics) j[std::string(metric_id(m))] = v[m].value();
  return j;
}

json row(std::string_view kind, std::string_view label, std::string_view mode, std::size_t n,
         json values) {
  return json{{"kind", kind}, {"model_label", label}, {"mode", mode}, {"n", n},
              {"values", std::move(values)}};
}

std::vector<std::string> ids_of(const std::vector<SessionResult>& results) {
  std::vector<std::string> ids;
  ids.reserve(results.size());
  for (const auto& r : results) ids.push_back(r.item_id);
  return ids;
}

json kappa_row(const std::vector<AnnotationRecord>& annotations, bool integer_only) {
  const auto categories = integer_only ? integer_categories() : half_point_categories();
  json values = json::object();
  json notes = json::object();
  std::size_t n_items = 0;
  std::size_t n_raters = 0;
  for (MetricKind m : kAllMetrics) {
    const std::string id(metric_id(m));
    try {
      const KappaResult k = kappa_for_metric(annotations, m, categories);
      values[id] = k.kappa;
      n_items = k.n_items;
      n_raters = k.n_raters;
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateAgreement && e.code() != Errc::UnequalRaterCounts) throw;
      values[id] = nullptr;
      notes[id] = std::string(to_string(e.code()));
    }
  }
  json j = {{"kind", "kappa"},       {"categories", categories}, {"n_items", n_items},
            {"n_raters", n_raters}, {"values", std::move(values)}};
  if (!notes.empty()) j["notes"] = std::move(notes);
  return j;
}

std::array<std::optional<double>, kMetricCount> table_values(const json& values) {
  std::array<std::optional<double>, kMetricCount> out;
  for (MetricKind m : kAllMetrics) {
    const auto it = values.find(std::string(metric_id(m)));
    if (it != values.end() && it->is_number()) out[static_cast<std::size_t>(m)] = it->get<double>();
  }
  return out;
}

}  // namespace

StatsFiles compute_stats(const std::vector<BatchEntry>& entries,
                         const std::vector<AnnotationRecord>& annotations,
                         bool integer_only) {
  std::vector<SessionResult> results;
  for (const auto& e : entries) {
    if (e.result) results.push_back(*e.result);
  }
  if (annotations.empty()) throw Error(Errc::NoAnnotations, "annotation file is empty");

  std::string stats;
  auto emit = [&stats](const json& j) { stats += j.dump() + "\n"; };

  const auto groups = aggregate_means(results);
  for (const auto& g : groups) {
    emit(row("means", g.model_label, to_string(g.mode), g.n, metric_values(g.means)));
  }

  const auto all_consensus = consensus(annotations);
  std::vector<MeanVector> human;
  for (const auto& c : all_consensus) human.push_back(c.mean);
  MeanVector baseline;
  for (MetricKind m : kAllMetrics) {
    double sum = 0;
    for (const auto& h : human) sum += h[m];
    baseline[m] = sum / static_cast<double>(human.size());
  }
  emit(row("means", kHumanLabel, kBaselineMode, human.size(), metric_values(baseline)));

  for (const auto& g : groups) {
    std::vector<SessionResult> members;
    for (const auto& r : results) {
      if (r.model_label == g.model_label && r.mode == g.mode) members.push_back(r);
    }
    const auto matched = consensus(annotations, ids_of(members));
    json r_values = json::object();
    for (const auto& c : correlate(members, matched)) {
      r_values[std::string(metric_id(c.metric))] = c.r ? json(*c.r) : json(nullptr);
    }
    emit(row("correlation", g.model_label, to_string(g.mode), members.size(), r_values));
    json em = json::object();
    for (MetricKind m : kAllMetrics) {
      em[std::string(metric_id(m))] = exact_match_rate(members, matched, m);
    }
    emit(row("exact_match", g.model_label, to_string(g.mode), members.size(), em));
  }
  emit(kappa_row(annotations, integer_only));

  std::string consensus_out;
  for (const auto& c : all_consensus) {
    json j = {{"item_id", c.item_id},
              {"n_annotators", c.n_annotators},
              {"mean", metric_values(c.mean)},
              {"rounded", metric_values(c.rounded)}};
    consensus_out += j.dump() + "\n";
  }
  return StatsFiles{std::move(stats), std::move(consensus_out)};
}

std::vector<std::pair<std::string, std::string>> render_report(const std::string& stats_jsonl) {
  TableSpec scores{"Mean scores", "Model", "Approach", {}};
  TableSpec correlations{"Pearson correlation with human consensus", "Model", "Approach", {}};
  TableSpec exact{"Exact match with human consensus (%)", "Model", "Approach", {}};
  std::vector<TableRow> human_rows;

  std::istringstream in(stats_jsonl);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::MalformedRecord,
                  "stats.jsonl:" + std::to_string(lineno) + ": " + e.what());
    }
    const std::string kind = j.value("kind", "");
    if (kind == "kappa") continue;
    if (kind != "means" && kind != "correlation" && kind != "exact_match") {
      throw Error(Errc::MalformedRecord,
                  "stats.jsonl:" + std::to_string(lineno) + ": unknown kind '" + kind + "'");
    }
    const std::string label = j.value("model_label", "");
    const std::string mode = j.value("mode", "");
    const auto values = table_values(j.value("values", json::object()));
    if (kind == "means" && label == kHumanLabel && mode == kBaselineMode) {
      human_rows.push_back(TableRow{"Human", "", values});
      continue;
    }
    TableSpec& table = kind == "means" ? scores : kind == "correlation" ? correlations : exact;
    table.rows.push_back(TableRow{label, mode, values});
  }
  scores.rows.insert(scores.rows.end(), human_rows.begin(), human_rows.end());

  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& [name, table] : {std::pair<std::string, const TableSpec*>{"scores", &scores},
                                    {"correlations", &correlations},
                                    {"exact_match", &exact}}) {
    files.emplace_back(name + ".md", render_markdown(*table));
    files.emplace_back(name + ".csv", render_csv(*table));
  }
  return files;
}

}  // namespace qjudge::cli
