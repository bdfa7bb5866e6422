#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qjudge/metrics.hpp"

namespace qjudge {

/// Strengths and flaws pulled from one judge reply, in reply order.
struct Critique {
  std::vector<std::string> strengths;
  std::vector<std::string> flaws;

  friend bool operator==(const Critique&, const Critique&) = default;
};

struct ParsedTurn {
  ScoreVector scores;
  Critique critique;
  std::string raw_text;

  friend bool operator==(const ParsedTurn&, const ParsedTurn&) = default;
};

/// Finds, for each metric, the first line shaped like
///   [bullet] [emphasis] MetricName [score] [:] N [/5 | out of 5]
/// and quantizes N with round_to_half. Only lines that begin with the
/// metric name count, so numbers in prose are never captured.
///
/// Throws MissingMetric (message names the metric), AmbiguousScore when
/// the chosen line carries a second, different "N/5" for the same metric,
/// or OutOfRange.
ScoreVector extract_scores(std::string_view text);

/// Collects items under the "Strengths in the question" and "Flaws in the
/// question" summary headings. Without those headings, falls back to the
/// bodies of per-metric "Strengths:" / "Flaws:" lines. Items are trimmed,
/// stripped of bullets and emphasis, whitespace-collapsed; "None" entries
/// are dropped. Throws NoCritiqueFound if neither form is present.
Critique extract_critique(std::string_view text);

/// Both extractors; raw_text keeps the input verbatim.
ParsedTurn parse_turn(std::string_view text);

}  // namespace qjudge
