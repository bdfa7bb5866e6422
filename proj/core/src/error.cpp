#include "qjudge/error.hpp"

namespace qjudge {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::MissingContext: return "MissingContext";
    case Errc::DuplicateAnnotation: return "DuplicateAnnotation";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::AuthError: return "AuthError";
    case Errc::TransientExhausted: return "TransientExhausted";
    case Errc::RequestRejected: return "RequestRejected";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::ScriptExhausted: return "ScriptExhausted";
    case Errc::CacheCorrupt: return "CacheCorrupt";
    case Errc::EmptyContext: return "EmptyContext";
    case Errc::EmptyQuestion: return "EmptyQuestion";
    case Errc::InvalidTemplate: return "InvalidTemplate";
    case Errc::MissingMetric: return "MissingMetric";
    case Errc::AmbiguousScore: return "AmbiguousScore";
    case Errc::NoCritiqueFound: return "NoCritiqueFound";
    case Errc::EmptyGeneration: return "EmptyGeneration";
    case Errc::MissingQuestion: return "MissingQuestion";
    case Errc::NoAnnotations: return "NoAnnotations";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateSeries: return "DegenerateSeries";
    case Errc::UnequalRaterCounts: return "UnequalRaterCounts";
    case Errc::DegenerateAgreement: return "DegenerateAgreement";
    case Errc::ItemSetMismatch: return "ItemSetMismatch";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

std::optional<Errc> parse_errc(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(Errc::Io); ++i) {
    const auto code = static_cast<Errc>(i);
    if (to_string(code) == name) return code;
  }
  return std::nullopt;
}

}  // namespace qjudge
