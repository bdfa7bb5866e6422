#include "qjudge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qjudge/error.hpp"

namespace qjudge {

namespace {

__extension__ typedef __int128 wide_int;

ScoreVector rounded_mean(const MeanVector& mean) {
  std::array<double, kMetricCount> raw{};
  for (MetricKind m : kAllMetrics) raw[static_cast<std::size_t>(m)] = mean[m];
  return ScoreVector::rounded(raw);
}

ConsensusScore make_consensus(const std::string& item_id,
                              const std::vector<ScoreVector>& scores) {
  const MeanVector mean = mean_scores(scores);
  return ConsensusScore{item_id, mean, rounded_mean(mean), scores.size()};
}

std::map<std::string, std::vector<ScoreVector>> by_item(
    const std::vector<AnnotationRecord>& annotations) {
  std::map<std::string, std::vector<ScoreVector>> grouped;
  for (const auto& a : annotations) grouped[a.item_id].push_back(a.scores);
  return grouped;
}

/// Consensus lookup aligned to the results, or ItemSetMismatch.
std::vector<const ConsensusScore*> align(const std::vector<SessionResult>& results,
                                         const std::vector<ConsensusScore>& consensus) {
  std::map<std::string, const ConsensusScore*> index;
  for (const auto& c : consensus) index[c.item_id] = &c;
  std::set<std::string> result_ids;
  for (const auto& r : results) result_ids.insert(r.item_id);
  if (result_ids.size() != results.size()) {
    throw Error(Errc::ItemSetMismatch, "results contain a repeated item id");
  }
  std::vector<const ConsensusScore*> aligned;
  aligned.reserve(results.size());
  for (const auto& r : results) {
    const auto it = index.find(r.item_id);
    if (it == index.end()) {
      throw Error(Errc::ItemSetMismatch, "item '" + r.item_id + "' has no human consensus");
    }
    aligned.push_back(it->second);
  }
  for (const auto& [id, _] : index) {
    if (!result_ids.contains(id)) {
      throw Error(Errc::ItemSetMismatch, "item '" + id + "' has no model result");
    }
  }
  return aligned;
}

}  // namespace

std::vector<ConsensusScore> consensus(const std::vector<AnnotationRecord>& annotations) {
  std::vector<ConsensusScore> out;
  for (const auto& [id, scores] : by_item(annotations)) out.push_back(make_consensus(id, scores));
  return out;
}

std::vector<ConsensusScore> consensus(const std::vector<AnnotationRecord>& annotations,
                                      const std::vector<std::string>& item_ids) {
  const auto grouped = by_item(annotations);
  std::vector<ConsensusScore> out;
  out.reserve(item_ids.size());
  for (const auto& id : item_ids) {
    const auto it = grouped.find(id);
    if (it == grouped.end()) {
      throw Error(Errc::NoAnnotations, "item '" + id + "' has no annotations");
    }
    out.push_back(make_consensus(id, it->second));
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::LengthMismatch, "pearson: series lengths differ (" +
                                          std::to_string(x.size()) + " vs " +
                                          std::to_string(y.size()) + ")");
  }
  const std::size_t n = x.size();
  if (n < 2) throw Error(Errc::DegenerateSeries, "pearson: need at least two points");
  double mx = 0;
  double my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0;
  double sxx = 0;
  double syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw Error(Errc::DegenerateSeries, "pearson: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

KappaResult fleiss_kappa(const std::vector<std::vector<int>>& counts,
                         std::vector<double> categories) {
  if (counts.empty()) throw Error(Errc::EmptyInput, "fleiss_kappa: no items");
  const std::size_t k = categories.size();
  std::vector<wide_int> column(k, 0);
  wide_int squares = 0;
  long long raters = -1;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& row = counts[i];
    if (row.size() != k) {
      throw Error(Errc::LengthMismatch, "fleiss_kappa: item " + std::to_string(i) + " has " +
                                            std::to_string(row.size()) + " categories, expected " +
                                            std::to_string(k));
    }
    long long sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (row[j] < 0) throw Error(Errc::OutOfRange, "fleiss_kappa: negative count");
      sum += row[j];
      column[j] += row[j];
      squares += static_cast<wide_int>(row[j]) * row[j];
    }
    if (raters < 0) raters = sum;
    if (sum != raters) {
      throw Error(Errc::UnequalRaterCounts, "fleiss_kappa: item " + std::to_string(i) + " has " +
                                                std::to_string(sum) + " ratings, expected " +
                                                std::to_string(raters));
    }
  }
  if (raters < 2) throw Error(Errc::UnequalRaterCounts, "fleiss_kappa: need at least 2 raters");

  const auto n = static_cast<wide_int>(raters);
  const auto total = static_cast<wide_int>(counts.size()) * n;
  const wide_int a = squares - total;
  wide_int b = 0;
  for (wide_int c : column) b += c * c;
  if (total * total == b) {
    throw Error(Errc::DegenerateAgreement, "fleiss_kappa: every rating is in one category");
  }
  const wide_int num = a * total - b * (n - 1);
  const wide_int den = (total * total - b) * (n - 1);
  const double kappa =
      static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
  return KappaResult{kappa, std::move(categories), counts.size(),
                     static_cast<std::size_t>(raters)};
}

std::vector<double> half_point_categories() {
  std::vector<double> out;
  for (int h = Score::kMinHalves; h <= Score::kMaxHalves; ++h) out.push_back(h / 2.0);
  return out;
}

std::vector<double> integer_categories() { return {1, 2, 3, 4, 5}; }

KappaResult kappa_for_metric(const std::vector<AnnotationRecord>& annotations, MetricKind metric,
                             const std::vector<double>& categories) {
  std::map<std::string, std::vector<int>> rows;
  for (const auto& a : annotations) {
    const double v = a.scores[metric].value();
    const auto it = std::find(categories.begin(), categories.end(), v);
    if (it == categories.end()) {
      throw Error(Errc::OutOfRange, std::string(metric_id(metric)) + " score " +
                                        std::to_string(v) + " of item '" + a.item_id +
                                        "' is not a kappa category");
    }
    auto& row = rows[a.item_id];
    row.resize(categories.size(), 0);
    ++row[static_cast<std::size_t>(it - categories.begin())];
  }
  std::vector<std::vector<int>> counts;
  counts.reserve(rows.size());
  for (auto& [_, row] : rows) counts.push_back(std::move(row));
  return fleiss_kappa(counts, categories);
}

double exact_match_rate(const std::vector<SessionResult>& results,
                        const std::vector<ConsensusScore>& consensus, MetricKind metric) {
  const auto aligned = align(results, consensus);
  if (results.empty()) throw Error(Errc::EmptyInput, "exact_match_rate: no items");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].final_scores[metric] == aligned[i]->rounded[metric]) ++matches;
  }
  return 100.0 * static_cast<double>(matches) / static_cast<double>(results.size());
}

std::vector<CorrelationRow> correlate(const std::vector<SessionResult>& results,
                                      const std::vector<ConsensusScore>& consensus) {
  const auto aligned = align(results, consensus);
  std::vector<CorrelationRow> rows;
  for (MetricKind m : kAllMetrics) {
    std::vector<double> model;
    std::vector<double> human;
    for (std::size_t i = 0; i < results.size(); ++i) {
      model.push_back(results[i].final_scores[m].value());
      human.push_back(aligned[i]->mean[m]);
    }
    CorrelationRow row{m, std::nullopt, results.size()};
    try {
      row.r = pearson(model, human);
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateSeries) throw;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<GroupMeans> aggregate_means(const std::vector<SessionResult>& results) {
  if (results.empty()) throw Error(Errc::EmptyGroup, "aggregate_means: no results");
  std::map<std::pair<std::string, EvalMode>, std::vector<ScoreVector>> groups;
  for (const auto& r : results) groups[{r.model_label, r.mode}].push_back(r.final_scores);
  std::vector<GroupMeans> out;
  for (const auto& [key, scores] : groups) {
    out.push_back(GroupMeans{key.first, key.second, mean_scores(scores), scores.size()});
  }
  return out;
}

}  // namespace qjudge
