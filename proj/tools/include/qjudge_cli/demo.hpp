#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qjudge/dataset.hpp"

namespace qjudge::cli {

/// Call counts from one demo run.
struct DemoSummary {
  std::uint64_t scripted_calls = 0;  // replies produced by the canned judges
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t http_requests = 0;   // must stay zero
};

/// Bundled inputs, as shipped in the binary.
std::vector<QuestionItem> demo_items();
std::vector<AnnotationRecord> demo_annotations();

/// Generates questions, evaluates them directly and with the two-judge
/// loop, computes statistics and renders the tables into `out_dir`, using
/// canned judges behind a response cache at <out_dir>/cache. Any request
/// the canned judges do not recognize fails instead of reaching a network.
DemoSummary run_demo(const std::filesystem::path& out_dir, std::size_t parallelism = 4);

}  // namespace qjudge::cli
