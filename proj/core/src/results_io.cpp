#include "qjudge/results_io.hpp"

#include <sstream>

#include "json.hpp"
#include "qjudge/dataset.hpp"
#include "qjudge/error.hpp"

namespace qjudge {

using nlohmann::json;

namespace {

json scores_json(const ScoreVector& scores) {
  json j = json::object();
  for (MetricKind m : kAllMetrics) j[std::string(metric_id(m))] = scores[m].value();
  return j;
}

ScoreVector scores_from(const json& j) {
  if (!j.is_object()) throw Error(Errc::MalformedRecord, "scores must be an object");
  std::array<double, kMetricCount> values{};
  for (MetricKind m : kAllMetrics) {
    const auto it = j.find(std::string(metric_id(m)));
    if (it == j.end() || !it->is_number()) {
      throw Error(Errc::MalformedRecord, "scores lack " + std::string(metric_id(m)));
    }
    values[static_cast<std::size_t>(m)] = it->get<double>();
  }
  return ScoreVector::exact(values);
}

json critique_json(const Critique& c) {
  return json{{"strengths", c.strengths}, {"flaws", c.flaws}};
}

Critique critique_from(const json& j) {
  return Critique{j.at("strengths").get<std::vector<std::string>>(),
                  j.at("flaws").get<std::vector<std::string>>()};
}

TemplateName template_from(const std::string& id) {
  for (TemplateName t :
       {TemplateName::Generation, TemplateName::DirectEval, TemplateName::FeedbackEval}) {
    if (template_id(t) == id) return t;
  }
  throw Error(Errc::MalformedRecord, "unknown prompt template '" + id + "'");
}

EvaluatorRole role_from(const std::string& s) {
  if (s == to_string(EvaluatorRole::JudgeA)) return EvaluatorRole::JudgeA;
  if (s == to_string(EvaluatorRole::JudgeB)) return EvaluatorRole::JudgeB;
  throw Error(Errc::MalformedRecord, "unknown role '" + s + "'");
}

json session_json(const SessionResult& r, bool include_raw) {
  json transcript = json::array();
  for (const auto& turn : r.transcript) {
    json t = {{"role", to_string(turn.role)},
              {"iteration", turn.iteration},
              {"prompt", template_id(turn.prompt)},
              {"scores", scores_json(turn.parsed.scores)},
              {"critique", critique_json(turn.parsed.critique)}};
    if (include_raw) t["raw_text"] = turn.parsed.raw_text;
    transcript.push_back(std::move(t));
  }
  return json{{"item_id", r.item_id},
              {"model_label", r.model_label},
              {"mode", to_string(r.mode)},
              {"final_scores", scores_json(r.final_scores)},
              {"final_critique", critique_json(r.final_critique)},
              {"converged", r.converged},
              {"iterations_used", r.iterations_used},
              {"transcript", std::move(transcript)}};
}

SessionResult session_from(const json& j) {
  SessionResult r;
  r.item_id = j.at("item_id").get<std::string>();
  r.model_label = j.at("model_label").get<std::string>();
  const auto mode = parse_mode(j.at("mode").get<std::string>());
  if (!mode) throw Error(Errc::MalformedRecord, "unknown mode");
  r.mode = *mode;
  r.final_scores = scores_from(j.at("final_scores"));
  r.final_critique = critique_from(j.at("final_critique"));
  r.converged = j.at("converged").get<bool>();
  r.iterations_used = j.at("iterations_used").get<int>();
  for (const auto& t : j.at("transcript")) {
    TurnRecord turn{role_from(t.at("role").get<std::string>()), t.at("iteration").get<int>(),
                    template_from(t.at("prompt").get<std::string>()),
                    ParsedTurn{scores_from(t.at("scores")), critique_from(t.at("critique")),
                               t.value("raw_text", std::string())}};
    r.transcript.push_back(std::move(turn));
  }
  return r;
}

/// Invalid UTF-8 in judge output is replaced, not thrown on.
std::string dump_record(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

std::string batch_entry_to_json(const BatchEntry& entry, bool include_raw) {
  if (entry.result) return dump_record(session_json(*entry.result, include_raw));
  json j = {{"item_id", entry.item_id}};
  if (entry.failure) {
    j["error"] = {{"code", to_string(entry.failure->code)}, {"message", entry.failure->message}};
  }
  return dump_record(j);
}

BatchEntry batch_entry_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    BatchEntry entry;
    entry.item_id = j.at("item_id").get<std::string>();
    if (j.contains("error")) {
      const auto code = parse_errc(j["error"].at("code").get<std::string>());
      if (!code) throw Error(Errc::MalformedRecord, "unknown error code");
      entry.failure =
          BatchFailure{entry.item_id, *code, j["error"].at("message").get<std::string>()};
    } else {
      entry.result = session_from(j);
    }
    return entry;
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("bad result record: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedRecord) throw;
    throw Error(Errc::MalformedRecord, std::string("bad result record: ") + e.what());
  }
}

std::string results_to_jsonl(const std::vector<BatchEntry>& entries, bool include_raw) {
  std::string out;
  for (const auto& entry : entries) {
    out += batch_entry_to_json(entry, include_raw);
    out += '\n';
  }
  return out;
}

void write_results(const std::filesystem::path& path, const std::vector<BatchEntry>& entries,
                   bool include_raw) {
  write_text_file(path, results_to_jsonl(entries, include_raw));
}

std::vector<BatchEntry> load_results(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<BatchEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      entries.push_back(batch_entry_from_json(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return entries;
}

}  // namespace qjudge
