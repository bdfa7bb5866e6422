#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qjudge/dataset.hpp"
#include "qjudge/error.hpp"
#include "qjudge/llm.hpp"
#include "qjudge/parse.hpp"
#include "qjudge/prompts.hpp"

namespace qjudge {

/// JudgeA opens the session and answers second in every round; JudgeB
/// answers first in every round.
enum class EvaluatorRole { JudgeA, JudgeB };
enum class EvalMode { Direct, Mirror };

/// Strict stops once the judges agree in two consecutive rounds; simple
/// stops at the first agreeing round.
enum class ConvergencePolicy { Strict, Simple };

std::string_view to_string(EvaluatorRole role) noexcept;
std::string_view to_string(EvalMode mode) noexcept;
std::string_view to_string(ConvergencePolicy policy) noexcept;
std::optional<EvalMode> parse_mode(std::string_view s) noexcept;
std::optional<ConvergencePolicy> parse_policy(std::string_view s) noexcept;

struct EngineConfig {
  int max_iterations = 5;
  ConvergencePolicy policy = ConvergencePolicy::Strict;
  LlmConfig judge_a;
  LlmConfig judge_b;

  /// Throws InvalidConfig.
  void validate(EvalMode mode) const;
};

struct TurnRecord {
  EvaluatorRole role;
  int iteration;          // 0 only for JudgeA's opening pass
  TemplateName prompt;    // which template produced the request
  ParsedTurn parsed;

  friend bool operator==(const TurnRecord&, const TurnRecord&) = default;
};

struct SessionResult {
  std::string item_id;
  std::string model_label;
  EvalMode mode = EvalMode::Direct;
  std::vector<TurnRecord> transcript;
  ScoreVector final_scores = ScoreVector::exact({1, 1, 1, 1, 1});
  Critique final_critique;
  bool converged = false;
  int iterations_used = 0;

  friend bool operator==(const SessionResult&, const SessionResult&) = default;
};

/// An Error raised inside a session, tagged with where it happened.
class SessionError : public Error {
 public:
  SessionError(Errc code, std::string item_id, std::optional<EvaluatorRole> role,
               std::optional<int> iteration, const std::string& detail);

  [[nodiscard]] const std::string& item_id() const noexcept { return item_id_; }
  [[nodiscard]] std::optional<EvaluatorRole> role() const noexcept { return role_; }
  [[nodiscard]] std::optional<int> iteration() const noexcept { return iteration_; }

 private:
  std::string item_id_;
  std::optional<EvaluatorRole> role_;
  std::optional<int> iteration_;
};

/// Fills item.question with the trimmed reply. Throws EmptyGeneration on a
/// blank reply; backend errors pass through as SessionError.
QuestionItem generate_question(const QuestionItem& item, Backend& backend,
                               const LlmConfig& config,
                               const PromptSet& prompts = PromptSet::defaults());

/// One direct prompt, one completion, one parse.
SessionResult evaluate_direct(const QuestionItem& item, Backend& backend,
                              const LlmConfig& config,
                              const PromptSet& prompts = PromptSet::defaults());

/// Two-judge review loop.
///
/// JudgeA first answers the direct prompt (iteration 0), producing the
/// opening strengths/flaws. Each round k = 1..max_iterations then runs
/// JudgeB on a feedback prompt carrying the previous turn's critique,
/// followed by JudgeA on a feedback prompt carrying JudgeB's critique.
/// Round k agrees when the two score vectors of that round are equal.
/// On termination final_scores is JudgeA's round-k vector; if the cap is
/// hit first, it is JudgeA's last vector and converged is false.
SessionResult evaluate_mirror(const QuestionItem& item, const EngineConfig& config,
                              Backend& judge_a, Backend& judge_b,
                              const PromptSet& prompts = PromptSet::defaults());

struct BatchFailure {
  std::string item_id;
  Errc code;
  std::string message;

  friend bool operator==(const BatchFailure&, const BatchFailure&) = default;
};

/// Exactly one of result / failure is set.
struct BatchEntry {
  std::string item_id;
  std::optional<SessionResult> result;
  std::optional<BatchFailure> failure;

  [[nodiscard]] bool ok() const noexcept { return result.has_value(); }
};

struct JudgePanel {
  std::shared_ptr<Backend> judge_a;
  std::shared_ptr<Backend> judge_b;  // unused in direct mode
};

/// Evaluates every item with at most `parallelism` sessions in flight.
/// Output order matches input order; a failing item becomes a failure
/// entry and never aborts the batch.
std::vector<BatchEntry> run_batch(const std::vector<QuestionItem>& items, EvalMode mode,
                                  const EngineConfig& config, const JudgePanel& judges,
                                  std::size_t parallelism,
                                  const PromptSet& prompts = PromptSet::defaults(),
                                  std::string model_label = {});

struct GenerationEntry {
  QuestionItem item;
  std::optional<BatchFailure> failure;
};

std::vector<GenerationEntry> generate_batch(const std::vector<QuestionItem>& items,
                                            Backend& backend, const LlmConfig& config,
                                            std::size_t parallelism,
                                            const PromptSet& prompts = PromptSet::defaults());

/// Label used when none is supplied: the judge model, or "a+b" for two
/// different MIRROR judges.
std::string default_model_label(EvalMode mode, const EngineConfig& config);

}  // namespace qjudge
