#include "qjudge/engine.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>

#include "text_util.hpp"

namespace qjudge {

namespace {

std::string describe(const std::string& item_id, std::optional<EvaluatorRole> role,
                     std::optional<int> iteration, const std::string& detail) {
  std::string out = "item '" + item_id + "'";
  if (role) out += ", " + std::string(to_string(*role));
  if (iteration) out += ", iteration " + std::to_string(*iteration);
  return out + ": " + detail;
}

const std::string& require_question(const QuestionItem& item) {
  if (!item.question || trim(*item.question).empty()) {
    throw SessionError(Errc::MissingQuestion, item.id, std::nullopt, std::nullopt,
                       "item has no question to evaluate");
  }
  return *item.question;
}

/// Runs one judge turn and tags any failure with its position.
TurnRecord run_turn(const QuestionItem& item, Backend& backend, const LlmConfig& config,
                    EvaluatorRole role, int iteration, TemplateName name,
                    const std::function<std::string()>& build_prompt) {
  try {
    CompletionOutcome outcome = complete(backend, CompletionRequest{build_prompt(), config});
    return TurnRecord{role, iteration, name, parse_turn(outcome.text)};
  } catch (const SessionError&) {
    throw;
  } catch (const Error& e) {
    throw SessionError(e.code(), item.id, role, iteration, e.what());
  }
}

/// Calls fn(i) for i in [0, n) on up to `parallelism` threads.
void parallel_for(std::size_t n, std::size_t parallelism,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

BatchFailure failure_from(const std::string& item_id, const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return BatchFailure{item_id, err->code(), err->what()};
  }
  return BatchFailure{item_id, Errc::Io, e.what()};
}

}  // namespace

std::string_view to_string(EvaluatorRole role) noexcept {
  return role == EvaluatorRole::JudgeA ? "judge_a" : "judge_b";
}

std::string_view to_string(EvalMode mode) noexcept {
  return mode == EvalMode::Direct ? "direct" : "mirror";
}

std::string_view to_string(ConvergencePolicy policy) noexcept {
  return policy == ConvergencePolicy::Strict ? "strict" : "simple";
}

std::optional<EvalMode> parse_mode(std::string_view s) noexcept {
  if (s == "direct") return EvalMode::Direct;
  if (s == "mirror") return EvalMode::Mirror;
  return std::nullopt;
}

std::optional<ConvergencePolicy> parse_policy(std::string_view s) noexcept {
  if (s == "strict") return ConvergencePolicy::Strict;
  if (s == "simple") return ConvergencePolicy::Simple;
  return std::nullopt;
}

void EngineConfig::validate(EvalMode mode) const {
  if (max_iterations < 1) throw Error(Errc::InvalidConfig, "max_iterations must be >= 1");
  judge_a.validate();
  if (mode == EvalMode::Mirror) judge_b.validate();
}

SessionError::SessionError(Errc code, std::string item_id, std::optional<EvaluatorRole> role,
                           std::optional<int> iteration, const std::string& detail)
    : Error(code, describe(item_id, role, iteration, detail)),
      item_id_(std::move(item_id)),
      role_(role),
      iteration_(iteration) {}

QuestionItem generate_question(const QuestionItem& item, Backend& backend,
                               const LlmConfig& config, const PromptSet& prompts) {
  std::string reply;
  try {
    reply = complete(backend, CompletionRequest{prompts.generation(item.context), config}).text;
  } catch (const Error& e) {
    throw SessionError(e.code(), item.id, std::nullopt, std::nullopt, e.what());
  }
  const auto question = trim(reply);
  if (question.empty()) {
    throw SessionError(Errc::EmptyGeneration, item.id, std::nullopt, std::nullopt,
                       "generator returned a blank reply");
  }
  QuestionItem out = item;
  out.question = std::string(question);
  return out;
}

SessionResult evaluate_direct(const QuestionItem& item, Backend& backend,
                              const LlmConfig& config, const PromptSet& prompts) {
  const std::string& question = require_question(item);
  TurnRecord turn = run_turn(item, backend, config, EvaluatorRole::JudgeA, 0,
                             TemplateName::DirectEval,
                             [&] { return prompts.direct(item.context, question); });

  SessionResult result;
  result.item_id = item.id;
  result.model_label = config.model_id;
  result.mode = EvalMode::Direct;
  result.final_scores = turn.parsed.scores;
  result.final_critique = turn.parsed.critique;
  result.converged = true;
  result.iterations_used = 0;
  result.transcript.push_back(std::move(turn));
  return result;
}

SessionResult evaluate_mirror(const QuestionItem& item, const EngineConfig& config,
                              Backend& judge_a, Backend& judge_b, const PromptSet& prompts) {
  const std::string& question = require_question(item);
  try {
    config.validate(EvalMode::Mirror);
  } catch (const Error& e) {
    throw SessionError(e.code(), item.id, std::nullopt, std::nullopt, e.what());
  }

  SessionResult result;
  result.item_id = item.id;
  result.model_label = default_model_label(EvalMode::Mirror, config);
  result.mode = EvalMode::Mirror;

  auto feedback_prompt = [&](const Critique& critique) {
    return [&prompts, &item, &question, &critique] {
      return prompts.feedback(item.context, question, critique.strengths, critique.flaws);
    };
  };

  // The opening pass has empty feedback sets, so it uses the plain direct prompt.
  result.transcript.push_back(run_turn(item, judge_a, config.judge_a, EvaluatorRole::JudgeA, 0,
                                       TemplateName::DirectEval,
                                       [&] { return prompts.direct(item.context, question); }));
  Critique feedback = result.transcript.back().parsed.critique;

  bool previous_round_agreed = false;
  for (int k = 1; k <= config.max_iterations; ++k) {
    result.transcript.push_back(run_turn(item, judge_b, config.judge_b, EvaluatorRole::JudgeB,
                                         k, TemplateName::FeedbackEval,
                                         feedback_prompt(feedback)));
    const ParsedTurn& reply_b = result.transcript.back().parsed;
    const ScoreVector scores_b = reply_b.scores;
    const Critique critique_b = reply_b.critique;

    result.transcript.push_back(run_turn(item, judge_a, config.judge_a, EvaluatorRole::JudgeA,
                                         k, TemplateName::FeedbackEval,
                                         feedback_prompt(critique_b)));
    const ParsedTurn& reply_a = result.transcript.back().parsed;
    feedback = reply_a.critique;

    result.final_scores = reply_a.scores;
    result.final_critique = reply_a.critique;
    result.iterations_used = k;

    const bool agreed = score_vectors_equal(reply_a.scores, scores_b);
    const bool done = config.policy == ConvergencePolicy::Simple
                          ? agreed
                          : agreed && previous_round_agreed;
    if (done) {
      result.converged = true;
      return result;
    }
    previous_round_agreed = agreed;
  }
  result.converged = false;
  return result;
}

std::string default_model_label(EvalMode mode, const EngineConfig& config) {
  if (mode == EvalMode::Direct || config.judge_a.model_id == config.judge_b.model_id) {
    return config.judge_a.model_id;
  }
  return config.judge_a.model_id + "+" + config.judge_b.model_id;
}

std::vector<BatchEntry> run_batch(const std::vector<QuestionItem>& items, EvalMode mode,
                                  const EngineConfig& config, const JudgePanel& judges,
                                  std::size_t parallelism, const PromptSet& prompts,
                                  std::string model_label) {
  config.validate(mode);
  if (!judges.judge_a || (mode == EvalMode::Mirror && !judges.judge_b)) {
    throw Error(Errc::InvalidConfig, "missing judge backend for " + std::string(to_string(mode)));
  }
  if (model_label.empty()) model_label = default_model_label(mode, config);

  std::vector<BatchEntry> entries(items.size());
  parallel_for(items.size(), parallelism, [&](std::size_t i) {
    const QuestionItem& item = items[i];
    BatchEntry& entry = entries[i];
    entry.item_id = item.id;
    try {
      SessionResult result =
          mode == EvalMode::Direct
              ? evaluate_direct(item, *judges.judge_a, config.judge_a, prompts)
              : evaluate_mirror(item, config, *judges.judge_a, *judges.judge_b, prompts);
      result.model_label = model_label;
      entry.result = std::move(result);
    } catch (const std::exception& e) {
      entry.failure = failure_from(item.id, e);
    }
  });
  return entries;
}

std::vector<GenerationEntry> generate_batch(const std::vector<QuestionItem>& items,
                                            Backend& backend, const LlmConfig& config,
                                            std::size_t parallelism, const PromptSet& prompts) {
  config.validate();
  std::vector<GenerationEntry> entries(items.size());
  parallel_for(items.size(), parallelism, [&](std::size_t i) {
    entries[i].item = items[i];
    try {
      entries[i].item = generate_question(items[i], backend, config, prompts);
    } catch (const std::exception& e) {
      entries[i].failure = failure_from(items[i].id, e);
    }
  });
  return entries;
}

}  // namespace qjudge
