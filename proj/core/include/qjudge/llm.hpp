#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qjudge {

/// Connection and sampling settings for one model. Credentials never live
/// here; `api_key_env` names the environment variable that holds them.
struct LlmConfig {
  std::string model_id;
  std::string endpoint_url;
  std::string api_key_env;
  double temperature = 0.7;
  int max_tokens = 2048;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;

  /// Throws Error(InvalidConfig) if any invariant is violated.
  void validate() const;

  friend bool operator==(const LlmConfig&, const LlmConfig&) = default;
};

/// Parses {model_id, endpoint_url, api_key_env, temperature, max_tokens,
/// timeout_s, max_retries}. Only model_id is required; the rest default.
LlmConfig parse_llm_config(const std::string& json_text);
LlmConfig load_llm_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys) for digests and manifests.
std::string llm_config_to_json(const LlmConfig& config);

/// Config for offline backends (scripted, demo) that never touch the network.
LlmConfig offline_config(std::string model_id);

struct CompletionRequest {
  std::string prompt;
  LlmConfig config;
};

struct CompletionOutcome {
  std::string text;
  int attempts = 1;  // 0 iff from_cache
  bool from_cache = false;
};

/// A chat-completion provider. Implementations must tolerate concurrent
/// complete() calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionOutcome complete(const CompletionRequest& request) = 0;
};

/// Validates the request (nonempty prompt, valid config) and dispatches.
CompletionOutcome complete(Backend& backend, const CompletionRequest& request);

/// Returns script entries in order, one per call. Thread-safe; calls past
/// the end throw Error(ScriptExhausted).
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> script);

  CompletionOutcome complete(const CompletionRequest& request) override;

  [[nodiscard]] std::size_t calls() const;
  [[nodiscard]] std::vector<std::string> prompts() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> script_;
  std::size_t next_ = 0;
  std::vector<std::string> prompts_;
};

/// Dispatches each request to the first route whose needle occurs in the
/// prompt, else to the fallback. Lets per-item scripts run in parallel
/// batches without depending on scheduling order.
class RoutedBackend final : public Backend {
 public:
  explicit RoutedBackend(std::shared_ptr<Backend> fallback = nullptr);

  void add_route(std::string needle, std::shared_ptr<Backend> backend);
  CompletionOutcome complete(const CompletionRequest& request) override;

 private:
  std::vector<std::pair<std::string, std::shared_ptr<Backend>>> routes_;
  std::shared_ptr<Backend> fallback_;
};

/// SHA-256 (hex) over model_id, prompt, temperature and max_tokens.
std::string cache_key(const CompletionRequest& request);

/// Content-addressed response cache in front of another backend.
///
/// Layout: <dir>/<key[0:2]>/<key>.txt. The first line is a header
/// "<key>\t<model_id>\t<sha256 of text>", the rest is the response text
/// byte for byte. A header that does not match the request or the body
/// raises Error(CacheCorrupt).
class CachedBackend final : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::filesystem::path dir);

  CompletionOutcome complete(const CompletionRequest& request) override;

  [[nodiscard]] std::filesystem::path entry_path(const std::string& key) const;
  [[nodiscard]] std::uint64_t hits() const noexcept { return hits_.load(); }
  [[nodiscard]] std::uint64_t misses() const noexcept { return misses_.load(); }

 private:
  std::mutex& stripe_for(const std::string& key);

  std::shared_ptr<Backend> inner_;
  std::filesystem::path dir_;
  std::array<std::mutex, 16> stripes_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

/// Wraps `backend` in a CachedBackend rooted at `cache_dir`.
std::shared_ptr<Backend> with_cache(std::shared_ptr<Backend> backend,
                                    std::filesystem::path cache_dir);

struct RetryPolicy {
  std::chrono::milliseconds initial_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{30'000};
};

/// Delay before retry 1..max_retries: initial * multiplier^k, capped.
std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy,
                                                        int max_retries);

/// OpenAI-compatible chat-completions client. Each request is a single user
/// message; the reply is the first choice's message content. HTTP 429, 5xx
/// and transport failures are retried; 401/403 are not.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(RetryPolicy policy = {});

  CompletionOutcome complete(const CompletionRequest& request) override;

  /// Process-wide count of HTTP requests issued by any HttpBackend.
  static std::uint64_t requests_issued() noexcept;

 private:
  RetryPolicy policy_;
};

}  // namespace qjudge
