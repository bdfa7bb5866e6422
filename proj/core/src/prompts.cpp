#include "qjudge/prompts.hpp"

#include <array>
#include <optional>

#include "qjudge/dataset.hpp"
#include "qjudge/error.hpp"
#include "qjudge/metrics.hpp"
#include "text_util.hpp"

namespace qjudge {

namespace {

constexpr std::array<std::string_view, 1> kGenerationSlots = {"context"};
constexpr std::array<std::string_view, 3> kDirectSlots = {"context", "question",
                                                          "metric_definitions"};
constexpr std::array<std::string_view, 5> kFeedbackSlots = {
    "context", "question", "metric_definitions", "strengths", "flaws"};

constexpr std::string_view kEvaluatorPreamble =
    "You are an expert educator evaluating the quality of a question that was generated "
    "automatically from a context.\n"
    "\n"
    "Score the question on each metric below. Scores range from 1 to 5; half points such "
    "as 3.5 are allowed.\n"
    "\n"
    "{metric_definitions}\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Question:\n"
    "{question}\n"
    "\n";

constexpr std::string_view kFeedbackBlock =
    "Another evaluator has already reviewed this question. Their assessment is summarized "
    "below.\n"
    "\n"
    "Prior strengths:\n"
    "{strengths}\n"
    "\n"
    "Prior flaws:\n"
    "{flaws}\n"
    "\n"
    "Reconsider your scores in light of this feedback. Keep a score where you still agree "
    "with it and revise it where the feedback convinces you.\n"
    "\n";

constexpr std::string_view kOutputFormat =
    "Respond in exactly this format, replacing X with your score:\n"
    "\n"
    "Grammaticality: X/5\n"
    "    Strengths: <what the question does well on this metric>\n"
    "    Flaws: <what should be improved, or None.>\n"
    "Appropriateness: X/5\n"
    "    Strengths: ...\n"
    "    Flaws: ...\n"
    "Relevance: X/5\n"
    "    Strengths: ...\n"
    "    Flaws: ...\n"
    "Novelty: X/5\n"
    "    Strengths: ...\n"
    "    Flaws: ...\n"
    "Complexity: X/5\n"
    "    Strengths: ...\n"
    "    Flaws: ...\n"
    "\n"
    "Strengths in the Question Based on the Evaluation Scores:\n"
    "    <one strength per line>\n"
    "\n"
    "Flaws in the Question Based on the Evaluation Scores:\n"
    "    <one flaw per line, or None.>\n";

constexpr std::string_view kGenerationTemplate =
    "You are an experienced teacher. Read the context below and write exactly one "
    "open-ended question that a student could answer using the context. Reply with the "
    "question only, on a single line, without numbering or commentary.\n"
    "\n"
    "Context:\n"
    "{context}\n";

bool is_slot_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

struct Slot {
  std::size_t begin;  // index of '{'
  std::size_t end;    // one past '}'
  std::string_view name;
};

std::optional<Slot> next_slot(std::string_view body, std::size_t from) {
  for (auto open = body.find('{', from); open != std::string_view::npos;
       open = body.find('{', open + 1)) {
    std::size_t i = open + 1;
    while (i < body.size() && is_slot_char(body[i])) ++i;
    if (i > open + 1 && i < body.size() && body[i] == '}') {
      return Slot{open, i + 1, body.substr(open + 1, i - open - 1)};
    }
  }
  return std::nullopt;
}

std::string bullet_list(std::span<const std::string> items) {
  std::string out;
  for (const auto& item : items) {
    auto line = collapse_whitespace(item);
    if (line.empty()) continue;
    if (!out.empty()) out += '\n';
    out += "- ";
    out += line;
  }
  return out.empty() ? "(none)" : out;
}

void require_text(std::string_view context, std::string_view question, bool need_question) {
  if (trim(context).empty()) throw Error(Errc::EmptyContext, "context is empty");
  if (need_question && trim(question).empty()) {
    throw Error(Errc::EmptyQuestion, "question is empty");
  }
}

}  // namespace

std::string_view template_id(TemplateName name) noexcept {
  switch (name) {
    case TemplateName::Generation: return "generation";
    case TemplateName::DirectEval: return "direct_eval";
    case TemplateName::FeedbackEval: return "feedback_eval";
  }
  return "unknown";
}

std::span<const std::string_view> required_placeholders(TemplateName name) noexcept {
  switch (name) {
    case TemplateName::Generation: return kGenerationSlots;
    case TemplateName::DirectEval: return kDirectSlots;
    case TemplateName::FeedbackEval: return kFeedbackSlots;
  }
  return {};
}

PromptTemplate::PromptTemplate(TemplateName name, std::string body)
    : name_(name), body_(std::move(body)) {
  const auto required = required_placeholders(name_);
  std::map<std::string, int, std::less<>> seen;
  for (auto slot = next_slot(body_, 0); slot; slot = next_slot(body_, slot->end)) {
    if (std::find(required.begin(), required.end(), slot->name) == required.end()) {
      throw Error(Errc::InvalidTemplate, std::string(template_id(name_)) +
                                             " template: placeholder {" +
                                             std::string(slot->name) + "} is not allowed");
    }
    ++seen[std::string(slot->name)];
  }
  for (auto slot : required) {
    auto it = seen.find(slot);
    const int count = it == seen.end() ? 0 : it->second;
    if (count != 1) {
      throw Error(Errc::InvalidTemplate,
                  std::string(template_id(name_)) + " template: placeholder {" +
                      std::string(slot) + "} must appear exactly once, found " +
                      std::to_string(count));
    }
  }
}

std::string PromptTemplate::render(
    const std::map<std::string, std::string, std::less<>>& values) const {
  std::string out;
  out.reserve(body_.size() + 1024);
  std::size_t pos = 0;
  for (auto slot = next_slot(body_, 0); slot; slot = next_slot(body_, slot->end)) {
    out.append(body_, pos, slot->begin - pos);
    auto it = values.find(slot->name);
    if (it == values.end()) {
      throw Error(Errc::InvalidTemplate, "no value for placeholder {" + std::string(slot->name) + "}");
    }
    out += it->second;
    pos = slot->end;
  }
  out.append(body_, pos, std::string::npos);
  return out;
}

PromptSet::PromptSet(PromptTemplate generation, PromptTemplate direct, PromptTemplate feedback)
    : generation_(std::move(generation)), direct_(std::move(direct)), feedback_(std::move(feedback)) {}

const PromptSet& PromptSet::defaults() {
  static const PromptSet set(
      PromptTemplate(TemplateName::Generation, std::string(kGenerationTemplate)),
      PromptTemplate(TemplateName::DirectEval,
                     std::string(kEvaluatorPreamble) + std::string(kOutputFormat)),
      PromptTemplate(TemplateName::FeedbackEval, std::string(kEvaluatorPreamble) +
                                                     std::string(kFeedbackBlock) +
                                                     std::string(kOutputFormat)));
  return set;
}

PromptSet PromptSet::with_overrides(const std::filesystem::path& dir) {
  auto load = [&dir](const PromptTemplate& fallback) {
    const auto path = dir / (std::string(template_id(fallback.name())) + ".txt");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return fallback;
    try {
      return PromptTemplate(fallback.name(), read_text_file(path));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.what());
    }
  };
  const auto& base = defaults();
  return PromptSet(load(base.generation_), load(base.direct_), load(base.feedback_));
}

const PromptTemplate& PromptSet::get(TemplateName name) const {
  switch (name) {
    case TemplateName::Generation: return generation_;
    case TemplateName::DirectEval: return direct_;
    case TemplateName::FeedbackEval: return feedback_;
  }
  return direct_;
}

std::string PromptSet::generation(std::string_view context) const {
  require_text(context, {}, false);
  return generation_.render({{"context", std::string(context)}});
}

std::string PromptSet::direct(std::string_view context, std::string_view question) const {
  require_text(context, question, true);
  return direct_.render({{"context", std::string(context)},
                         {"question", std::string(question)},
                         {"metric_definitions", metric_definitions_block()}});
}

std::string PromptSet::feedback(std::string_view context, std::string_view question,
                                std::span<const std::string> strengths,
                                std::span<const std::string> flaws) const {
  require_text(context, question, true);
  return feedback_.render({{"context", std::string(context)},
                           {"question", std::string(question)},
                           {"metric_definitions", metric_definitions_block()},
                           {"strengths", bullet_list(strengths)},
                           {"flaws", bullet_list(flaws)}});
}

std::string metric_definitions_block() {
  std::string out;
  const auto& defs = metric_definitions();
  for (MetricKind m : kAllMetrics) {
    if (!out.empty()) out += '\n';
    out += metric_display_name(m);
    out += ": ";
    out += defs.at(m);
  }
  return out;
}

std::string build_generation_prompt(std::string_view context) {
  return PromptSet::defaults().generation(context);
}

std::string build_direct_prompt(std::string_view context, std::string_view question) {
  return PromptSet::defaults().direct(context, question);
}

std::string build_feedback_prompt(std::string_view context, std::string_view question,
                                  std::span<const std::string> strengths,
                                  std::span<const std::string> flaws) {
  return PromptSet::defaults().feedback(context, question, strengths, flaws);
}

}  // namespace qjudge
