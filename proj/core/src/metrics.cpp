#include "qjudge/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>

#include "qjudge/error.hpp"

namespace qjudge {

namespace {

struct MetricNames {
  std::string_view id;
  std::string_view display;
  std::string_view short_label;
};

constexpr std::array<MetricNames, kMetricCount> kNames = {{
    {"grammaticality", "Grammaticality", "Gram"},
    {"appropriateness", "Appropriateness", "App"},
    {"relevance", "Relevance", "Rel"},
    {"novelty", "Novelty", "Nov"},
    {"complexity", "Complexity", "Com"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string_view metric_id(MetricKind m) noexcept {
  return kNames[static_cast<std::size_t>(m)].id;
}

std::string_view metric_display_name(MetricKind m) noexcept {
  return kNames[static_cast<std::size_t>(m)].display;
}

std::string_view metric_short_label(MetricKind m) noexcept {
  return kNames[static_cast<std::size_t>(m)].short_label;
}

std::optional<MetricKind> parse_metric(std::string_view name) noexcept {
  for (MetricKind m : kAllMetrics) {
    if (iequals(name, metric_id(m))) return m;
  }
  return std::nullopt;
}

Score Score::from_halves(int halves) {
  if (halves < kMinHalves || halves > kMaxHalves) {
    throw Error(Errc::OutOfRange,
                "score " + format_value(halves / 2.0) + " outside the 1-5 scale");
  }
  return Score(halves);
}

Score Score::exact(double value) {
  if (!std::isfinite(value)) {
    throw Error(Errc::OutOfRange, "score is not a finite number");
  }
  const double twice = value * 2.0;
  if (twice != std::floor(twice)) {
    throw Error(Errc::OutOfRange,
                "score " + format_value(value) + " is not a multiple of 0.5");
  }
  if (twice < kMinHalves || twice > kMaxHalves) {
    throw Error(Errc::OutOfRange, "score " + format_value(value) + " outside the 1-5 scale");
  }
  return Score(static_cast<int>(twice));
}

Score round_to_half(double raw) {
  if (!std::isfinite(raw)) {
    throw Error(Errc::OutOfRange, "score is not a finite number");
  }
  // floor(2x + 0.5) sends exact ties upward, i.e. toward 5.0 on this scale.
  const double halves = std::floor(raw * 2.0 + 0.5);
  if (halves < Score::kMinHalves || halves > Score::kMaxHalves) {
    throw Error(Errc::OutOfRange,
                "score " + format_value(raw) + " rounds to " + format_value(halves / 2.0) +
                    ", outside the 1-5 scale");
  }
  return Score::from_halves(static_cast<int>(halves));
}

ScoreVector ScoreVector::rounded(const std::array<double, kMetricCount>& raw) {
  std::array<Score, kMetricCount> s{Score::from_halves(2), Score::from_halves(2),
                                    Score::from_halves(2), Score::from_halves(2),
                                    Score::from_halves(2)};
  for (std::size_t i = 0; i < kMetricCount; ++i) s[i] = round_to_half(raw[i]);
  return ScoreVector(s);
}

ScoreVector ScoreVector::exact(const std::array<double, kMetricCount>& values) {
  std::array<Score, kMetricCount> s{Score::from_halves(2), Score::from_halves(2),
                                    Score::from_halves(2), Score::from_halves(2),
                                    Score::from_halves(2)};
  for (std::size_t i = 0; i < kMetricCount; ++i) s[i] = Score::exact(values[i]);
  return ScoreVector(s);
}

std::array<double, kMetricCount> ScoreVector::values() const noexcept {
  std::array<double, kMetricCount> out{};
  for (std::size_t i = 0; i < kMetricCount; ++i) out[i] = scores_[i].value();
  return out;
}

bool score_vectors_equal(const ScoreVector& a, const ScoreVector& b) noexcept {
  return a == b;
}

MeanVector mean_scores(std::span<const ScoreVector> vectors) {
  if (vectors.empty()) {
    throw Error(Errc::EmptyInput, "cannot average an empty list of score vectors");
  }
  // Sums of half points are exact in double, so the only rounding is the final division.
  MeanVector mean;
  for (MetricKind m : kAllMetrics) {
    double sum = 0.0;
    for (const auto& v : vectors) sum += v[m].value();
    mean[m] = sum / static_cast<double>(vectors.size());
  }
  return mean;
}

const std::map<MetricKind, std::string_view>& metric_definitions() {
  static const std::map<MetricKind, std::string_view> defs = {
      {MetricKind::Grammaticality,
       "How grammatical the question is: well-formed syntax, correct word usage and "
       "punctuation, with no spelling errors. Score from 1 to 5."},
      {MetricKind::Appropriateness,
       "Whether the question is semantically correct, sensible and suitably phrased "
       "for a learner reading the context. Score from 1 to 5."},
      {MetricKind::Relevance,
       "How closely the question relates to the given context and can be answered "
       "from it. Score from 1 to 5."},
      {MetricKind::Novelty,
       "The originality and distinctiveness of the question compared with the obvious "
       "questions a reader would ask about the context. Score from 1 to 5."},
      {MetricKind::Complexity,
       "The level of reasoning or cognitive effort required to answer the question. "
       "Score from 1 to 5."},
  };
  return defs;
}

}  // namespace qjudge
