#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qjudge {

enum class Errc {
  // metrics
  OutOfRange,
  EmptyInput,
  // dataset
  FileNotFound,
  MalformedRecord,
  DuplicateId,
  MissingContext,
  DuplicateAnnotation,
  // llm
  InvalidConfig,
  AuthError,
  TransientExhausted,
  RequestRejected,
  MalformedResponse,
  ScriptExhausted,
  CacheCorrupt,
  // prompts
  EmptyContext,
  EmptyQuestion,
  InvalidTemplate,
  // parse
  MissingMetric,
  AmbiguousScore,
  NoCritiqueFound,
  // engine
  EmptyGeneration,
  MissingQuestion,
  // stats
  NoAnnotations,
  LengthMismatch,
  DegenerateSeries,
  UnequalRaterCounts,
  DegenerateAgreement,
  ItemSetMismatch,
  EmptyGroup,
  // report
  EmptyTable,
  // generic I/O
  Io,
};

std::string_view to_string(Errc code) noexcept;
/// Inverse of to_string.
std::optional<Errc> parse_errc(std::string_view name) noexcept;

/// Base error for everything the library throws. The code is stable and
/// serialized into result files; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qjudge
