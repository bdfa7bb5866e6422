#include "qjudge/error.hpp"
#include "qjudge/llm.hpp"

namespace qjudge {

ScriptedBackend::ScriptedBackend(std::vector<std::string> script) : script_(std::move(script)) {
  if (script_.empty()) throw Error(Errc::EmptyInput, "scripted backend needs at least one response");
}

CompletionOutcome ScriptedBackend::complete(const CompletionRequest& request) {
  std::lock_guard lock(mutex_);
  prompts_.push_back(request.prompt);
  if (next_ >= script_.size()) {
    throw Error(Errc::ScriptExhausted, "scripted backend exhausted after " +
                                           std::to_string(script_.size()) + " responses");
  }
  return CompletionOutcome{script_[next_++], 1, false};
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mutex_);
  return prompts_.size();
}

std::vector<std::string> ScriptedBackend::prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

RoutedBackend::RoutedBackend(std::shared_ptr<Backend> fallback) : fallback_(std::move(fallback)) {}

void RoutedBackend::add_route(std::string needle, std::shared_ptr<Backend> backend) {
  routes_.emplace_back(std::move(needle), std::move(backend));
}

CompletionOutcome RoutedBackend::complete(const CompletionRequest& request) {
  for (const auto& [needle, backend] : routes_) {
    if (request.prompt.find(needle) != std::string::npos) return backend->complete(request);
  }
  if (fallback_) return fallback_->complete(request);
  throw Error(Errc::InvalidConfig, "no backend route matches the prompt");
}

}  // namespace qjudge
