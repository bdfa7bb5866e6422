#include "qjudge/dataset.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "qjudge/error.hpp"
#include "text_util.hpp"

namespace qjudge {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kItemKeys = {
    "id", "dataset", "subject", "context", "question", "gold_question"};

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

json parse_line(const std::string& line, const std::string& source, std::size_t lineno) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedRecord, where(source, lineno) + ": invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) {
    throw Error(Errc::MalformedRecord, where(source, lineno) + ": record is not a JSON object");
  }
  return j;
}

std::optional<std::string> optional_string(const json& j, const char* key,
                                           const std::string& at) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(Errc::MalformedRecord, at + ": field '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string required_string(const json& j, const char* key, const std::string& at) {
  auto value = optional_string(j, key, at);
  if (!value) throw Error(Errc::MalformedRecord, at + ": missing field '" + key + "'");
  return *value;
}

template <typename Fn>
void for_each_record(const std::string& jsonl, Fn&& fn) {
  std::istringstream in(jsonl);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    fn(line, lineno);
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(Errc::FileNotFound, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw Error(Errc::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::vector<QuestionItem> parse_items(const std::string& jsonl, const std::string& source) {
  std::vector<QuestionItem> items;
  std::set<std::string, std::less<>> seen;
  for_each_record(jsonl, [&](const std::string& line, std::size_t lineno) {
    const auto at = where(source, lineno);
    const json j = parse_line(line, source, lineno);

    QuestionItem item;
    item.id = required_string(j, "id", at);
    if (trim(item.id).empty()) throw Error(Errc::MalformedRecord, at + ": empty id");
    item.dataset = required_string(j, "dataset", at);
    item.subject = optional_string(j, "subject", at);
    auto context = optional_string(j, "context", at);
    if (!context || trim(*context).empty()) {
      throw Error(Errc::MissingContext, at + ": item '" + item.id + "' has no context");
    }
    item.context = std::move(*context);
    item.question = optional_string(j, "question", at);
    item.gold_question = optional_string(j, "gold_question", at);
    for (const auto& [key, value] : j.items()) {
      if (!kItemKeys.contains(key)) item.extra.emplace(key, value.dump());
    }

    if (!seen.insert(item.id).second) {
      throw Error(Errc::DuplicateId, at + ": duplicate item id '" + item.id + "'");
    }
    items.push_back(std::move(item));
  });
  return items;
}

std::vector<QuestionItem> load_items(const std::filesystem::path& path) {
  return parse_items(read_text_file(path), path.string());
}

std::string item_to_json(const QuestionItem& item) {
  try {
    json j = json::object();
    for (const auto& [key, raw] : item.extra) j[key] = json::parse(raw);
    j["id"] = item.id;
    j["dataset"] = item.dataset;
    j["context"] = item.context;
    if (item.subject) j["subject"] = *item.subject;
    if (item.question) j["question"] = *item.question;
    if (item.gold_question) j["gold_question"] = *item.gold_question;
    return j.dump();
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedRecord, "item '" + item.id + "' cannot be written: " + e.what());
  }
}

void write_items(const std::filesystem::path& path, const std::vector<QuestionItem>& items) {
  std::string out;
  for (const auto& item : items) {
    out += item_to_json(item);
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<AnnotationRecord> parse_annotations(const std::string& jsonl,
                                                const std::string& source) {
  std::vector<AnnotationRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_record(jsonl, [&](const std::string& line, std::size_t lineno) {
    const auto at = where(source, lineno);
    const json j = parse_line(line, source, lineno);

    auto item_id = required_string(j, "item_id", at);
    auto annotator_id = required_string(j, "annotator_id", at);
    auto scores_it = j.find("scores");
    if (scores_it == j.end() || !scores_it->is_object()) {
      throw Error(Errc::MalformedRecord, at + ": 'scores' must be an object");
    }
    for (const auto& [key, value] : scores_it->items()) {
      if (!parse_metric(key)) {
        throw Error(Errc::MalformedRecord, at + ": unknown metric '" + key + "'");
      }
    }
    std::array<double, kMetricCount> values{};
    for (MetricKind m : kAllMetrics) {
      auto it = scores_it->find(std::string(metric_id(m)));
      if (it == scores_it->end()) {
        throw Error(Errc::MalformedRecord,
                    at + ": missing score for '" + std::string(metric_id(m)) + "'");
      }
      if (!it->is_number()) {
        throw Error(Errc::MalformedRecord,
                    at + ": score for '" + std::string(metric_id(m)) + "' is not a number");
      }
      values[static_cast<std::size_t>(m)] = it->get<double>();
    }
    std::optional<ScoreVector> scores;
    try {
      scores = ScoreVector::exact(values);
    } catch (const Error& e) {
      throw Error(e.code(), at + ": " + e.what());
    }

    if (!seen.emplace(item_id, annotator_id).second) {
      throw Error(Errc::DuplicateAnnotation,
                  at + ": annotator '" + annotator_id + "' already scored '" + item_id + "'");
    }
    records.push_back(AnnotationRecord{std::move(item_id), std::move(annotator_id), *scores});
  });
  return records;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_text_file(path), path.string());
}

std::string annotation_to_json(const AnnotationRecord& record) {
  json scores = json::object();
  for (MetricKind m : kAllMetrics) scores[std::string(metric_id(m))] = record.scores[m].value();
  json j = {{"item_id", record.item_id},
            {"annotator_id", record.annotator_id},
            {"scores", scores}};
  try {
    return j.dump();
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedRecord, "annotation for item '" + record.item_id +
                                           "' cannot be written: " + e.what());
  }
}

std::vector<QuestionItem> sample_items(const std::vector<QuestionItem>& items, std::size_t n,
                                       std::uint64_t seed) {
  if (n >= items.size()) return items;
  std::vector<QuestionItem> out;
  out.reserve(n);
  std::mt19937_64 engine(seed);
  const std::size_t total = items.size();
  for (std::size_t t = 0; t < total && out.size() < n; ++t) {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    const auto remaining = static_cast<double>(total - t);
    const auto needed = static_cast<double>(n - out.size());
    if (remaining * u < needed) out.push_back(items[t]);
  }
  return out;
}

}  // namespace qjudge
