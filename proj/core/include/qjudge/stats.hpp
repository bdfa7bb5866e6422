#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qjudge/dataset.hpp"
#include "qjudge/engine.hpp"
#include "qjudge/metrics.hpp"

namespace qjudge {

/// Mean of the annotators' scores for one item, and its half-point rounding.
struct ConsensusScore {
  std::string item_id;
  MeanVector mean;
  ScoreVector rounded;
  std::size_t n_annotators = 0;
};

/// Groups annotations by item, sorted by item id.
std::vector<ConsensusScore> consensus(const std::vector<AnnotationRecord>& annotations);

/// Same, restricted to `item_ids` and in that order. Throws NoAnnotations
/// naming the first item without any annotation.
std::vector<ConsensusScore> consensus(const std::vector<AnnotationRecord>& annotations,
                                      const std::vector<std::string>& item_ids);

/// Product-moment correlation, computed in two passes (means first).
/// Throws LengthMismatch, or DegenerateSeries when n < 2 or either series
/// has zero variance. The result is clamped to [-1, 1].
double pearson(std::span<const double> x, std::span<const double> y);

struct KappaResult {
  double kappa;
  std::vector<double> categories;
  std::size_t n_items;
  std::size_t n_raters;
};

/// `counts[i][j]` is how many raters put item i in category j.
///
/// With N items, n raters and T = N*n, the mean observed agreement and
/// chance agreement reduce to
///   P = A / (T (n-1)),  A = sum n_ij^2 - T
///   Pe = B / T^2,       B = sum_j (sum_i n_ij)^2
/// so kappa = (A T - B (n-1)) / ((T^2 - B)(n-1)), evaluated in integers and
/// divided once. Throws EmptyInput, LengthMismatch (row width differs from
/// the category count), UnequalRaterCounts (row sums differ or n < 2) and
/// DegenerateAgreement when Pe = 1.
KappaResult fleiss_kappa(const std::vector<std::vector<int>>& counts,
                         std::vector<double> categories);

/// 1.0, 1.5, ..., 5.0.
std::vector<double> half_point_categories();
/// 1, 2, 3, 4, 5.
std::vector<double> integer_categories();

/// Kappa over one metric's annotations. Items are the distinct item ids;
/// every item must have the same number of annotators. Throws OutOfRange if
/// a score is not one of `categories`.
KappaResult kappa_for_metric(const std::vector<AnnotationRecord>& annotations, MetricKind metric,
                             const std::vector<double>& categories);

/// Percentage (0..100) of items whose final score for `metric` equals the
/// rounded consensus. Throws ItemSetMismatch unless both sides cover the
/// same item ids, EmptyInput if both are empty.
double exact_match_rate(const std::vector<SessionResult>& results,
                        const std::vector<ConsensusScore>& consensus, MetricKind metric);

struct CorrelationRow {
  MetricKind metric;
  /// Empty when the series is degenerate (constant or too short).
  std::optional<double> r;
  std::size_t n;
};

/// Per metric, pearson(final score, unrounded consensus mean) over items.
/// Throws ItemSetMismatch like exact_match_rate.
std::vector<CorrelationRow> correlate(const std::vector<SessionResult>& results,
                                      const std::vector<ConsensusScore>& consensus);

struct GroupMeans {
  std::string model_label;
  EvalMode mode;
  MeanVector means;
  std::size_t n;
};

/// Mean final scores per (model label, mode), ordered by label then mode.
/// Throws EmptyGroup on empty input.
std::vector<GroupMeans> aggregate_means(const std::vector<SessionResult>& results);

}  // namespace qjudge
