#include "qjudge/parse.hpp"

#include <array>
#include <cctype>
#include <optional>
#include <string>

#include "qjudge/error.hpp"
#include "text_util.hpp"

namespace qjudge {

namespace {

constexpr std::string_view kBulletDot = "\xE2\x80\xA2";     // U+2022
constexpr std::string_view kMiddleDot = "\xC2\xB7";         // U+00B7
constexpr std::string_view kEnDash = "\xE2\x80\x93";        // U+2013

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string_view skip_spaces(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return s;
}

bool consume_prefix(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

bool consume_iprefix(std::string_view& s, std::string_view lower_prefix) {
  if (s.size() < lower_prefix.size()) return false;
  for (std::size_t i = 0; i < lower_prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != lower_prefix[i]) return false;
  }
  s.remove_prefix(lower_prefix.size());
  return true;
}

/// Drops heading hashes and one list marker ("-", "*", "+", bullet glyphs,
/// "1." / "1)") from the front of an already left-trimmed line.
std::string_view strip_marker(std::string_view s) {
  s = skip_spaces(s);
  while (!s.empty() && s.front() == '#') s.remove_prefix(1);
  s = skip_spaces(s);
  if (consume_prefix(s, kBulletDot) || consume_prefix(s, kMiddleDot) ||
      consume_prefix(s, kEnDash)) {
    return skip_spaces(s);
  }
  if (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '+')) {
    s.remove_prefix(1);
    return skip_spaces(s);
  }
  std::size_t digits = 0;
  while (digits < s.size() && is_digit(s[digits])) ++digits;
  if (digits > 0 && digits + 1 < s.size() && (s[digits] == '.' || s[digits] == ')') &&
      is_space(s[digits + 1])) {
    s.remove_prefix(digits + 1);
    return skip_spaces(s);
  }
  return s;
}

/// Line with emphasis markup removed, for score matching.
std::string without_emphasis(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  for (char c : line) {
    if (c != '*' && c != '_' && c != '`') out.push_back(c);
  }
  return out;
}

struct Number {
  double value;
  std::size_t length;
};

std::optional<Number> read_number(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i == 0) return std::nullopt;
  if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i;
  }
  return Number{std::stod(std::string(s.substr(0, i))), i};
}

enum class Scale { None, OutOfFive, Other };

/// Reads an optional "/5" or "out of 5" suffix; returns the kind and
/// advances `s` past it.
Scale read_scale(std::string_view& s) {
  std::string_view t = skip_spaces(s);
  if (consume_prefix(t, "/")) {
    t = skip_spaces(t);
    auto denom = read_number(t);
    if (!denom) return Scale::None;
    t.remove_prefix(denom->length);
    s = t;
    return denom->value == 5.0 ? Scale::OutOfFive : Scale::Other;
  }
  if (consume_iprefix(t, "out of")) {
    t = skip_spaces(t);
    auto denom = read_number(t);
    if (!denom) return Scale::None;
    t.remove_prefix(denom->length);
    s = t;
    return denom->value == 5.0 ? Scale::OutOfFive : Scale::Other;
  }
  return Scale::None;
}

/// If `rest` (lowercase) begins with another metric's name, returns true.
bool starts_with_metric(std::string_view lower_rest) {
  for (MetricKind m : kAllMetrics) {
    std::string_view t = lower_rest;
    if (consume_iprefix(t, to_lower(metric_display_name(m))) && (t.empty() || !is_alpha(t.front()))) {
      return true;
    }
  }
  return false;
}

/// Values of every "N/5" / "N out of 5" in `rest`, up to the first mention
/// of a different metric.
std::vector<double> trailing_scores(std::string_view rest, MetricKind self) {
  std::vector<double> found;
  const std::string lower = to_lower(rest);
  const std::string self_name = to_lower(metric_display_name(self));
  std::string_view s = lower;
  while (!s.empty()) {
    if (is_alpha(s.front())) {
      std::string_view t = s;
      const bool is_self = consume_iprefix(t, self_name);
      if (!is_self && starts_with_metric(s)) break;
      while (!s.empty() && is_alpha(s.front())) s.remove_prefix(1);
      continue;
    }
    if (is_digit(s.front())) {
      auto num = read_number(s);
      s.remove_prefix(num->length);
      std::string_view after = s;
      if (read_scale(after) == Scale::OutOfFive) {
        found.push_back(num->value);
        s = after;
      }
      while (!s.empty() && (is_digit(s.front()) || s.front() == '.')) s.remove_prefix(1);
      continue;
    }
    s.remove_prefix(1);
  }
  return found;
}

struct ScoreLine {
  double value;
  Scale scale;
};

/// Matches `line` as a score line for `metric`.
std::optional<ScoreLine> match_score_line(std::string_view line, MetricKind metric) {
  const std::string plain = without_emphasis(line);
  std::string_view s = strip_marker(plain);
  if (!consume_iprefix(s, to_lower(metric_display_name(metric)))) return std::nullopt;
  if (!s.empty() && is_alpha(s.front())) return std::nullopt;
  s = skip_spaces(s);
  if (consume_iprefix(s, "score")) s = skip_spaces(s);
  if (!s.empty() && (s.front() == ':' || s.front() == '=' || s.front() == '-')) {
    s.remove_prefix(1);
  } else {
    consume_prefix(s, kEnDash);
  }
  s = skip_spaces(s);
  auto num = read_number(s);
  if (!num) return std::nullopt;
  s.remove_prefix(num->length);
  const Scale scale = read_scale(s);
  if (scale == Scale::Other) {
    throw Error(Errc::OutOfRange, std::string(metric_display_name(metric)) +
                                      ": score is not on a 1-5 scale: '" +
                                      std::string(trim(line)) + "'");
  }
  for (double other : trailing_scores(s, metric)) {
    if (other != num->value) {
      throw Error(Errc::AmbiguousScore, std::string(metric_display_name(metric)) +
                                            ": conflicting scores on one line: '" +
                                            std::string(trim(line)) + "'");
    }
  }
  return ScoreLine{num->value, scale};
}

bool is_any_score_line(std::string_view line) {
  for (MetricKind m : kAllMetrics) {
    try {
      if (match_score_line(line, m)) return true;
    } catch (const Error&) {
      return true;
    }
  }
  return false;
}

/// Normalized critique item text: no bullets, emphasis, trailing
/// backslashes or redundant whitespace.
std::string clean_item(std::string_view line) {
  std::string_view s = trim(line);
  while (!s.empty() && (s.back() == '\\' || is_space(s.back()))) s.remove_suffix(1);
  std::string text;
  text.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 < s.size() && ((s[i] == '*' && s[i + 1] == '*') || (s[i] == '_' && s[i + 1] == '_'))) {
      ++i;
      continue;
    }
    text.push_back(s[i]);
  }
  std::string out = collapse_whitespace(strip_marker(text));
  while (!out.empty() && (out.front() == '*' || out.front() == '_')) out.erase(out.begin());
  while (!out.empty() && (out.back() == '*' || out.back() == '_')) out.pop_back();
  return collapse_whitespace(out);
}

bool is_none(std::string_view item) {
  const std::string lower = to_lower(item);
  return lower == "none" || lower == "none." || lower == "n/a";
}

bool is_heading(std::string_view raw, std::string_view cleaned) {
  if (!cleaned.empty() && cleaned.back() == ':') return true;
  return !trim(raw).empty() && trim(raw).front() == '#';
}

void push_item(std::vector<std::string>& into, std::string item) {
  if (!item.empty() && !is_none(item)) into.push_back(std::move(item));
}

std::optional<Critique> summary_sections(const std::vector<std::string_view>& lines) {
  enum class Section { None, Strengths, Flaws };
  Section section = Section::None;
  bool found = false;
  Critique critique;
  for (auto raw : lines) {
    const std::string cleaned = clean_item(raw);
    if (cleaned.empty()) continue;
    const std::string lower = to_lower(cleaned);
    if (lower.find("strengths in the question") != std::string::npos) {
      section = Section::Strengths;
      found = true;
      continue;
    }
    if (lower.find("flaws in the question") != std::string::npos) {
      section = Section::Flaws;
      found = true;
      continue;
    }
    if (section == Section::None) continue;
    if (is_heading(raw, cleaned) || is_any_score_line(raw)) {
      section = Section::None;
      continue;
    }
    push_item(section == Section::Strengths ? critique.strengths : critique.flaws, cleaned);
  }
  if (!found) return std::nullopt;
  return critique;
}

std::optional<Critique> per_metric_lines(const std::vector<std::string_view>& lines) {
  Critique critique;
  bool found = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string cleaned = clean_item(lines[i]);
    std::string_view s = cleaned;
    std::vector<std::string>* target = nullptr;
    if (consume_iprefix(s, "strengths:") || consume_iprefix(s, "strength:")) {
      target = &critique.strengths;
    } else if (consume_iprefix(s, "flaws:") || consume_iprefix(s, "flaw:")) {
      target = &critique.flaws;
    }
    if (target == nullptr) continue;
    found = true;
    const std::string body = clean_item(s);
    if (!body.empty()) {
      push_item(*target, body);
      continue;
    }
    // "Strengths:" alone on its line introduces a bullet list.
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const std::string next = clean_item(lines[j]);
      if (next.empty() || is_heading(lines[j], next) || is_any_score_line(lines[j])) break;
      const std::string lower = to_lower(next);
      if (lower.rfind("strength", 0) == 0 || lower.rfind("flaw", 0) == 0) break;
      push_item(*target, next);
      i = j;
    }
  }
  if (!found) return std::nullopt;
  return critique;
}

}  // namespace

ScoreVector extract_scores(std::string_view text) {
  const auto lines = split_lines(text);
  ScoreVector scores = ScoreVector::exact({1, 1, 1, 1, 1});
  for (MetricKind m : kAllMetrics) {
    std::optional<ScoreLine> hit;
    for (auto line : lines) {
      hit = match_score_line(line, m);
      if (hit) break;
    }
    if (!hit) {
      throw Error(Errc::MissingMetric,
                  "no score found for " + std::string(metric_display_name(m)));
    }
    try {
      scores.set(m, round_to_half(hit->value));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(metric_display_name(m)) + ": " + e.what());
    }
  }
  return scores;
}

Critique extract_critique(std::string_view text) {
  const auto lines = split_lines(text);
  if (auto summary = summary_sections(lines)) return *summary;
  if (auto fallback = per_metric_lines(lines)) return *fallback;
  throw Error(Errc::NoCritiqueFound, "judge output has no strengths or flaws");
}

ParsedTurn parse_turn(std::string_view text) {
  ScoreVector scores = extract_scores(text);
  Critique critique = extract_critique(text);
  return ParsedTurn{scores, std::move(critique), std::string(text)};
}

}  // namespace qjudge
