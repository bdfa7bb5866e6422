#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace qjudge {

/// The five rubric metrics, in report column order.
enum class MetricKind : std::size_t {
  Grammaticality = 0,
  Appropriateness = 1,
  Relevance = 2,
  Novelty = 3,
  Complexity = 4,
};

inline constexpr std::size_t kMetricCount = 5;

inline constexpr std::array<MetricKind, kMetricCount> kAllMetrics = {
    MetricKind::Grammaticality, MetricKind::Appropriateness, MetricKind::Relevance,
    MetricKind::Novelty, MetricKind::Complexity};

/// Lowercase identifier used in every file format ("grammaticality", ...).
std::string_view metric_id(MetricKind m) noexcept;
/// Capitalized name as it appears in prompts and judge output.
std::string_view metric_display_name(MetricKind m) noexcept;
/// Table column label ("Gram", "App", ...).
std::string_view metric_short_label(MetricKind m) noexcept;
/// Case-insensitive lookup by identifier or display name.
std::optional<MetricKind> parse_metric(std::string_view name) noexcept;

/// A rubric score on the 1..5 scale in steps of 0.5. Stored as an integer
/// number of half points so equality is exact.
class Score {
 public:
  static constexpr int kMinHalves = 2;
  static constexpr int kMaxHalves = 10;

  /// Throws Error(OutOfRange) unless 2 <= halves <= 10.
  static Score from_halves(int halves);
  /// Accepts only values already on the half-point grid; throws OutOfRange
  /// for off-grid or out-of-range input.
  static Score exact(double value);

  [[nodiscard]] constexpr double value() const noexcept { return halves_ / 2.0; }
  [[nodiscard]] constexpr int halves() const noexcept { return halves_; }

  friend constexpr auto operator<=>(Score, Score) = default;

 private:
  explicit constexpr Score(int halves) noexcept : halves_(halves) {}
  int halves_;
};

/// Nearest multiple of 0.5, ties toward 5.0. Out-of-range results are an
/// error (OutOfRange), never clamped.
Score round_to_half(double raw);

/// One Score per metric.
class ScoreVector {
 public:
  explicit ScoreVector(const std::array<Score, kMetricCount>& scores) : scores_(scores) {}

  /// Builds from raw values through round_to_half.
  static ScoreVector rounded(const std::array<double, kMetricCount>& raw);
  /// Builds from values that must already be on the half-point grid.
  static ScoreVector exact(const std::array<double, kMetricCount>& values);

  [[nodiscard]] Score operator[](MetricKind m) const noexcept {
    return scores_[static_cast<std::size_t>(m)];
  }
  void set(MetricKind m, Score s) noexcept { scores_[static_cast<std::size_t>(m)] = s; }

  [[nodiscard]] std::array<double, kMetricCount> values() const noexcept;

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;

 private:
  std::array<Score, kMetricCount> scores_;
};

/// Per-metric unquantized means.
struct MeanVector {
  std::array<double, kMetricCount> values{};

  [[nodiscard]] double operator[](MetricKind m) const noexcept {
    return values[static_cast<std::size_t>(m)];
  }
  double& operator[](MetricKind m) noexcept { return values[static_cast<std::size_t>(m)]; }

  friend bool operator==(const MeanVector&, const MeanVector&) = default;
};

/// True iff all five scores are identical. This is the convergence test.
bool score_vectors_equal(const ScoreVector& a, const ScoreVector& b) noexcept;

/// Per-metric arithmetic mean. Throws EmptyInput on an empty span.
MeanVector mean_scores(std::span<const ScoreVector> vectors);

/// Rubric text for each metric, embedded verbatim in evaluation prompts.
const std::map<MetricKind, std::string_view>& metric_definitions();

}  // namespace qjudge
