#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "qjudge/error.hpp"
#include "qjudge/llm.hpp"

namespace qjudge {

using nlohmann::json;

namespace {

std::atomic<std::uint64_t> g_requests_issued{0};

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::InvalidConfig, "endpoint_url has no scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string snippet(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

std::string extract_content(const std::string& body) {
  try {
    const json j = json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(Errc::MalformedResponse, "message content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedResponse,
                std::string("unexpected completion payload (") + e.what() + "): " + snippet(body));
  }
}

}  // namespace

std::vector<std::chrono::milliseconds> backoff_schedule(const RetryPolicy& policy,
                                                        int max_retries) {
  std::vector<std::chrono::milliseconds> delays;
  double next = static_cast<double>(policy.initial_delay.count());
  const auto cap = static_cast<double>(policy.max_delay.count());
  for (int i = 0; i < max_retries; ++i) {
    delays.emplace_back(static_cast<long long>(std::min(next, cap)));
    next *= std::max(policy.multiplier, 1.0);
  }
  return delays;
}

HttpBackend::HttpBackend(RetryPolicy policy) : policy_(policy) {}

std::uint64_t HttpBackend::requests_issued() noexcept { return g_requests_issued.load(); }

CompletionOutcome HttpBackend::complete(const CompletionRequest& request) {
  const LlmConfig& cfg = request.config;
  if (cfg.endpoint_url.empty()) {
    throw Error(Errc::InvalidConfig, "model '" + cfg.model_id + "' has no endpoint_url");
  }
  const Endpoint endpoint = split_url(cfg.endpoint_url);

  httplib::Headers headers;
  if (!cfg.api_key_env.empty()) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(Errc::AuthError, "environment variable " + cfg.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const json body = {
      {"model", cfg.model_id},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", cfg.temperature},
      {"max_tokens", cfg.max_tokens},
  };
  const std::string payload = body.dump(-1, ' ', false, json::error_handler_t::replace);

  const auto delays = backoff_schedule(policy_, cfg.max_retries);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - seconds);
  std::string last_failure;

  for (int attempt = 1; attempt <= cfg.max_retries + 1; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(delays[static_cast<std::size_t>(attempt - 2)]);

    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    ++g_requests_issued;
    auto res = client.Post(endpoint.path, headers, payload, "application/json");

    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    const int status = res->status;
    if (status == 200) {
      return CompletionOutcome{extract_content(res->body), attempt, false};
    }
    if (status == 401 || status == 403) {
      throw Error(Errc::AuthError, "HTTP " + std::to_string(status) + " from " +
                                       cfg.endpoint_url + ": " + snippet(res->body));
    }
    if (status == 429 || status >= 500) {
      last_failure = "HTTP " + std::to_string(status);
      continue;
    }
    throw Error(Errc::RequestRejected, "HTTP " + std::to_string(status) + " from " +
                                           cfg.endpoint_url + ": " + snippet(res->body));
  }
  throw Error(Errc::TransientExhausted, "giving up on " + cfg.endpoint_url + " after " +
                                            std::to_string(cfg.max_retries + 1) +
                                            " attempts; last failure: " + last_failure);
}

}  // namespace qjudge
