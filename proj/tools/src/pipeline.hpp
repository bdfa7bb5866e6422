#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qjudge/dataset.hpp"
#include "qjudge/engine.hpp"

namespace qjudge::cli {

inline constexpr std::string_view kHumanLabel = "human";
inline constexpr std::string_view kBaselineMode = "baseline";

struct StatsFiles {
  std::string stats_jsonl;
  std::string consensus_jsonl;
};

/// Means per (label, mode) plus the human baseline, correlation and
/// exact-match rows per group, and one kappa row per category set.
StatsFiles compute_stats(const std::vector<BatchEntry>& entries,
                         const std::vector<AnnotationRecord>& annotations,
                         bool integer_only);

/// (file name, contents) for scores / correlations / exact_match as .md
/// and .csv, built from stats.jsonl text.
std::vector<std::pair<std::string, std::string>> render_report(const std::string& stats_jsonl);

}  // namespace qjudge::cli
