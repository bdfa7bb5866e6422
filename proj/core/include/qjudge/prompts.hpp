#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qjudge {

enum class TemplateName { Generation, DirectEval, FeedbackEval };

/// "generation", "direct_eval", "feedback_eval"; also the override file stem.
std::string_view template_id(TemplateName name) noexcept;

/// Placeholders the template must contain, each exactly once.
std::span<const std::string_view> required_placeholders(TemplateName name) noexcept;

/// A prompt body with `{placeholder}` slots. Construction validates the
/// placeholder contract and throws Error(InvalidTemplate) on violation.
/// Braces that do not enclose a lowercase identifier are literal text.
class PromptTemplate {
 public:
  PromptTemplate(TemplateName name, std::string body);

  [[nodiscard]] TemplateName name() const noexcept { return name_; }
  [[nodiscard]] const std::string& body() const noexcept { return body_; }

  /// Single left-to-right pass, so substituted values are never rescanned.
  [[nodiscard]] std::string render(const std::map<std::string, std::string, std::less<>>& values) const;

 private:
  TemplateName name_;
  std::string body_;
};

/// The three templates used by a run.
class PromptSet {
 public:
  /// Built-in English templates.
  static const PromptSet& defaults();

  /// Defaults, with any of generation.txt / direct_eval.txt /
  /// feedback_eval.txt found in `dir` replacing the matching template.
  static PromptSet with_overrides(const std::filesystem::path& dir);

  [[nodiscard]] const PromptTemplate& get(TemplateName name) const;

  /// Throws EmptyContext.
  [[nodiscard]] std::string generation(std::string_view context) const;
  /// Throws EmptyContext, EmptyQuestion.
  [[nodiscard]] std::string direct(std::string_view context, std::string_view question) const;
  /// Throws EmptyContext, EmptyQuestion. Each item is collapsed onto one
  /// line; an empty list renders as "(none)".
  [[nodiscard]] std::string feedback(std::string_view context, std::string_view question,
                                     std::span<const std::string> strengths,
                                     std::span<const std::string> flaws) const;

 private:
  PromptSet(PromptTemplate generation, PromptTemplate direct, PromptTemplate feedback);

  PromptTemplate generation_;
  PromptTemplate direct_;
  PromptTemplate feedback_;
};

/// "Name: definition" lines for all five metrics, in column order.
std::string metric_definitions_block();

std::string build_generation_prompt(std::string_view context);
std::string build_direct_prompt(std::string_view context, std::string_view question);
std::string build_feedback_prompt(std::string_view context, std::string_view question,
                                  std::span<const std::string> strengths,
                                  std::span<const std::string> flaws);

}  // namespace qjudge
