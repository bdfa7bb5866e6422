#include <functional>

#include "qjudge/digest.hpp"
#include "qjudge/dataset.hpp"
#include "qjudge/error.hpp"
#include "qjudge/llm.hpp"

namespace qjudge {

namespace fs = std::filesystem;

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, fs::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  if (!inner_) throw Error(Errc::InvalidConfig, "cache needs an inner backend");
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(Errc::Io, "cannot create cache directory " + dir_.string() + ": " + ec.message());
}

fs::path CachedBackend::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".txt");
}

std::mutex& CachedBackend::stripe_for(const std::string& key) {
  return stripes_[std::hash<std::string>{}(key) % stripes_.size()];
}

CompletionOutcome CachedBackend::complete(const CompletionRequest& request) {
  const std::string key = cache_key(request);
  const fs::path path = entry_path(key);

  std::error_code ec;
  if (fs::exists(path, ec)) {
    const std::string raw = read_text_file(path);
    const auto newline = raw.find('\n');
    if (newline == std::string::npos) {
      throw Error(Errc::CacheCorrupt, path.string() + ": missing header line");
    }
    const std::string header = raw.substr(0, newline);
    std::string text = raw.substr(newline + 1);
    const std::string expected =
        key + '\t' + request.config.model_id + '\t' + sha256_hex(text);
    if (header != expected) {
      throw Error(Errc::CacheCorrupt, path.string() + ": header does not match request or body");
    }
    ++hits_;
    return CompletionOutcome{std::move(text), 0, true};
  }

  CompletionOutcome outcome = inner_->complete(request);
  ++misses_;
  {
    // Same key means same text, so the last writer winning is harmless; the
    // stripe lock only keeps two writers off one temp file.
    std::lock_guard lock(stripe_for(key));
    write_text_file(path, key + '\t' + request.config.model_id + '\t' +
                              sha256_hex(outcome.text) + '\n' + outcome.text);
  }
  outcome.from_cache = false;
  return outcome;
}

std::shared_ptr<Backend> with_cache(std::shared_ptr<Backend> backend, fs::path cache_dir) {
  return std::make_shared<CachedBackend>(std::move(backend), std::move(cache_dir));
}

}  // namespace qjudge
