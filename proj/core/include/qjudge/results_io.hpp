#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qjudge/engine.hpp"

namespace qjudge {

/// One JSONL line per entry. Successful entries carry the full session
/// (transcript raw text only when `include_raw`); failures are
/// {"item_id", "error": {"code", "message"}}.
std::string batch_entry_to_json(const BatchEntry& entry, bool include_raw = true);

/// Inverse of batch_entry_to_json; raw_text is empty when it was omitted.
/// Throws MalformedRecord.
BatchEntry batch_entry_from_json(const std::string& line);

void write_results(const std::filesystem::path& path, const std::vector<BatchEntry>& entries,
                   bool include_raw = true);
std::string results_to_jsonl(const std::vector<BatchEntry>& entries, bool include_raw = true);
std::vector<BatchEntry> load_results(const std::filesystem::path& path);

}  // namespace qjudge
