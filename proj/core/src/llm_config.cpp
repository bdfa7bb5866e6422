#include <cmath>
#include <cstdio>
#include <set>

#include "qjudge/digest.hpp"
#include "json.hpp"
#include "qjudge/dataset.hpp"
#include "qjudge/error.hpp"
#include "qjudge/llm.hpp"

namespace qjudge {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kConfigKeys = {
    "model_id", "endpoint_url", "api_key_env", "temperature",
    "max_tokens", "timeout_s", "max_retries"};

[[noreturn]] void invalid(const std::string& what) {
  throw Error(Errc::InvalidConfig, "invalid LLM config: " + what);
}

}  // namespace

void LlmConfig::validate() const {
  if (model_id.empty()) invalid("model_id is empty");
  for (char c : model_id) {
    if (static_cast<unsigned char>(c) < 0x20) invalid("model_id contains control characters");
  }
  if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0) {
    invalid("temperature must be in [0, 2]");
  }
  if (max_tokens < 1) invalid("max_tokens must be >= 1");
  if (max_retries < 0 || max_retries > 20) invalid("max_retries must be in [0, 20]");
  if (timeout.count() <= 0) invalid("timeout_s must be positive");
  if (!endpoint_url.empty() && endpoint_url.rfind("http://", 0) != 0 &&
      endpoint_url.rfind("https://", 0) != 0) {
    invalid("endpoint_url must start with http:// or https://");
  }
}

LlmConfig parse_llm_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid(std::string("not valid JSON (") + e.what() + ")");
  }
  if (!j.is_object()) invalid("top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "api_key" || key == "apiKey") {
      invalid("credentials must come from the environment variable named by api_key_env");
    }
    if (!kConfigKeys.contains(key)) invalid("unknown key '" + key + "'");
  }

  LlmConfig cfg;
  try {
    cfg.model_id = j.at("model_id").get<std::string>();
    if (j.contains("endpoint_url")) cfg.endpoint_url = j["endpoint_url"].get<std::string>();
    if (j.contains("api_key_env")) cfg.api_key_env = j["api_key_env"].get<std::string>();
    if (j.contains("temperature")) cfg.temperature = j["temperature"].get<double>();
    if (j.contains("max_tokens")) cfg.max_tokens = j["max_tokens"].get<int>();
    if (j.contains("max_retries")) cfg.max_retries = j["max_retries"].get<int>();
    if (j.contains("timeout_s")) {
      const double secs = j["timeout_s"].get<double>();
      if (!std::isfinite(secs) || secs <= 0 || secs > 86'400) invalid("timeout_s out of range");
      cfg.timeout = std::chrono::milliseconds(static_cast<long long>(std::llround(secs * 1000)));
    }
  } catch (const json::exception& e) {
    invalid(e.what());
  }
  cfg.validate();
  return cfg;
}

LlmConfig load_llm_config(const std::filesystem::path& path) {
  try {
    return parse_llm_config(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidConfig) {
      throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::string llm_config_to_json(const LlmConfig& config) {
  json j = {{"model_id", config.model_id},
            {"endpoint_url", config.endpoint_url},
            {"api_key_env", config.api_key_env},
            {"temperature", config.temperature},
            {"max_tokens", config.max_tokens},
            {"timeout_s", static_cast<double>(config.timeout.count()) / 1000.0},
            {"max_retries", config.max_retries}};
  return j.dump();
}

LlmConfig offline_config(std::string model_id) {
  LlmConfig cfg;
  cfg.model_id = std::move(model_id);
  return cfg;
}

CompletionOutcome complete(Backend& backend, const CompletionRequest& request) {
  if (request.prompt.empty()) {
    throw Error(Errc::EmptyInput, "completion request has an empty prompt");
  }
  request.config.validate();
  return backend.complete(request);
}

std::string cache_key(const CompletionRequest& request) {
  // Length-prefixed fields keep the encoding unambiguous; %.17g round-trips
  // the temperature exactly.
  char temperature[32];
  std::snprintf(temperature, sizeof temperature, "%.17g", request.config.temperature);
  std::string material;
  auto append = [&material](std::string_view field) {
    material += std::to_string(field.size());
    material += ':';
    material += field;
  };
  append(request.config.model_id);
  append(request.prompt);
  append(temperature);
  append(std::to_string(request.config.max_tokens));
  return sha256_hex(material);
}

}  // namespace qjudge
