#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qjudge/metrics.hpp"

namespace qjudge {

/// A context with its (possibly not yet generated) question.
struct QuestionItem {
  std::string id;
  std::string dataset;
  std::optional<std::string> subject;
  std::string context;
  std::optional<std::string> question;
  std::optional<std::string> gold_question;
  /// Unrecognized fields, keyed by name, each holding the value's JSON text.
  /// Carried through unchanged so richer exports survive a load/write cycle.
  std::map<std::string, std::string> extra;

  friend bool operator==(const QuestionItem&, const QuestionItem&) = default;
};

struct AnnotationRecord {
  std::string item_id;
  std::string annotator_id;
  ScoreVector scores;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// Reads a JSONL item file. Blank lines are skipped; line numbers in errors
/// are 1-based. Throws FileNotFound, MalformedRecord, DuplicateId, MissingContext.
std::vector<QuestionItem> load_items(const std::filesystem::path& path);

/// Parses item JSONL from memory; `source` names the input in error messages.
std::vector<QuestionItem> parse_items(const std::string& jsonl, const std::string& source);

std::string item_to_json(const QuestionItem& item);
void write_items(const std::filesystem::path& path, const std::vector<QuestionItem>& items);

/// Reads a JSONL annotation file. Scores must be on the half-point 1..5 grid.
/// Throws MalformedRecord, OutOfRange, DuplicateAnnotation.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
std::vector<AnnotationRecord> parse_annotations(const std::string& jsonl,
                                                const std::string& source);

std::string annotation_to_json(const AnnotationRecord& record);

/// Deterministic sample without replacement, returned in input order.
///
/// The generator is std::mt19937_64 seeded with `seed`; each draw maps the
/// top 53 bits of one engine output to a uniform double in [0, 1). Items are
/// chosen with Knuth's selection sampling (Algorithm S, TAOCP vol. 2, 3.4.2):
/// item t of N is kept with probability (n - kept) / (N - t). Both pieces are
/// fully specified by the C++ standard, so results agree across toolchains.
/// If n >= items.size() every item is returned.
std::vector<QuestionItem> sample_items(const std::vector<QuestionItem>& items, std::size_t n,
                                       std::uint64_t seed);

/// Whole-file read used by the loaders; throws FileNotFound or Io.
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename so readers never see partial files.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace qjudge
