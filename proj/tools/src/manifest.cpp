#include "manifest.hpp"

#include <chrono>
#include <ctime>

#include "json.hpp"
#include "qjudge/dataset.hpp"
#include "qjudge/digest.hpp"
#include "qjudge/version.hpp"

namespace qjudge::cli {

using nlohmann::json;

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json inputs = json::array();
  for (const auto& p : m.inputs) {
    json entry = {{"path", p.string()}};
    std::error_code ec;
    if (std::filesystem::is_regular_file(p, ec)) entry["sha256"] = sha256_hex(read_text_file(p));
    inputs.push_back(std::move(entry));
  }
  json outputs = json::array();
  for (const auto& p : m.outputs) outputs.push_back(p.string());
  json j = {{"tool", "qjudge"},
            {"version", std::string(kVersion)},
            {"command", m.command},
            {"argv", m.argv},
            {"config_digest", m.config_digest},
            {"seed", m.seed ? json(*m.seed) : json(nullptr)},
            {"inputs", std::move(inputs)},
            {"outputs", std::move(outputs)},
            {"started_at", m.started_at},
            {"finished_at", m.finished_at},
            {"counters", m.counters}};
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace qjudge::cli
