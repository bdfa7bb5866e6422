#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qjudge::cli {

/// Provenance record written once per invocation.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config_digest;
  std::optional<std::uint64_t> seed;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::string started_at;
  std::string finished_at;
  std::map<std::string, std::uint64_t> counters;
};

/// ISO-8601 UTC, second resolution.
std::string utc_now();

/// Inputs are recorded with their SHA-256 so a manifest pins the data used.
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace qjudge::cli
