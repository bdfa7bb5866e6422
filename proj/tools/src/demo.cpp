#include "qjudge_cli/demo.hpp"

#include <atomic>
#include <map>
#include <memory>

#include "demo_data.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "pipeline.hpp"
#include "qjudge/digest.hpp"
#include "qjudge/engine.hpp"
#include "qjudge/error.hpp"
#include "qjudge/llm.hpp"
#include "qjudge/results_io.hpp"

namespace qjudge::cli {

namespace {

constexpr std::string_view kFeedbackMarker = "Prior strengths:";
constexpr std::string_view kModelLabel = "demo-judge";

/// Replies with the same text on every call.
class FixedBackend final : public Backend {
 public:
  FixedBackend(std::string text, std::atomic<std::uint64_t>& calls)
      : text_(std::move(text)), calls_(calls) {}

  CompletionOutcome complete(const CompletionRequest&) override {
    ++calls_;
    return CompletionOutcome{text_, 1, false};
  }

 private:
  std::string text_;
  std::atomic<std::uint64_t>& calls_;
};

/// Stands in for any remote call; the demo must never reach it.
class RefusingBackend final : public Backend {
 public:
  CompletionOutcome complete(const CompletionRequest&) override {
    throw Error(Errc::RequestRejected, "demo backend received an unrecognized request");
  }
};

struct Transcripts {
  std::string_view judge_a_direct;
  std::string_view judge_a_feedback;
  std::string_view judge_b;
};

const std::map<std::string, Transcripts>& transcripts() {
  static const std::map<std::string, Transcripts> table = {
      {"econ-ppp", {"economics_judge_a.txt", "economics_judge_a.txt", "economics_judge_b.txt"}},
      {"history-medieval",
       {"history_judge_a.txt", "history_judge_a.txt", "history_judge_b.txt"}},
      {"biology-mesophiles",
       {"biology_judge_a.txt", "biology_judge_a.txt", "biology_judge_b.txt"}},
      {"earth-coriolis",
       {"earth_science_judge_a.txt", "earth_science_judge_a.txt", "earth_science_judge_b.txt"}},
      {"geography-himalayas",
       {"geography_judge_a_direct.txt", "geography_judge_a_feedback.txt",
        "geography_judge_b.txt"}},
  };
  return table;
}

std::string text(std::string_view name) { return std::string(demo_data::file(name)); }

}  // namespace

std::vector<QuestionItem> demo_items() {
  return parse_items(text("items.jsonl"), "demo items.jsonl");
}

std::vector<AnnotationRecord> demo_annotations() {
  return parse_annotations(text("annotations.jsonl"), "demo annotations.jsonl");
}

DemoSummary run_demo(const std::filesystem::path& out_dir, std::size_t parallelism) {
  const std::string started = utc_now();
  const std::uint64_t http_before = HttpBackend::requests_issued();
  std::filesystem::create_directories(out_dir);

  const auto items = demo_items();
  const auto annotations = demo_annotations();
  const auto questions = nlohmann::json::parse(text("questions.json"));

  std::atomic<std::uint64_t> scripted{0};
  auto refuse = std::make_shared<RefusingBackend>();
  auto generator = std::make_shared<RoutedBackend>(refuse);
  auto judge_a = std::make_shared<RoutedBackend>(refuse);
  auto judge_b = std::make_shared<RoutedBackend>(refuse);
  for (const auto& item : items) {
    const auto& t = transcripts().at(item.id);
    generator->add_route(item.context, std::make_shared<FixedBackend>(
                                           questions.at(item.id).get<std::string>(), scripted));
    auto a = std::make_shared<RoutedBackend>(
        std::make_shared<FixedBackend>(text(t.judge_a_direct), scripted));
    a->add_route(std::string(kFeedbackMarker),
                 std::make_shared<FixedBackend>(text(t.judge_a_feedback), scripted));
    judge_a->add_route(item.context, a);
    judge_b->add_route(item.context, std::make_shared<FixedBackend>(text(t.judge_b), scripted));
  }

  const auto cache_dir = out_dir / "cache";
  auto cached_gen = std::make_shared<CachedBackend>(generator, cache_dir);
  auto cached_a = std::make_shared<CachedBackend>(judge_a, cache_dir);
  auto cached_b = std::make_shared<CachedBackend>(judge_b, cache_dir);

  const LlmConfig gen_config = offline_config("demo-generator");
  EngineConfig engine;
  engine.judge_a = offline_config("demo-judge-a");
  engine.judge_b = offline_config("demo-judge-b");

  std::vector<QuestionItem> generated;
  for (auto& entry : generate_batch(items, *cached_gen, gen_config, parallelism)) {
    if (entry.failure) throw Error(entry.failure->code, entry.failure->message);
    generated.push_back(std::move(entry.item));
  }

  std::vector<BatchEntry> entries =
      run_batch(generated, EvalMode::Direct, engine, JudgePanel{cached_a, nullptr}, parallelism,
                PromptSet::defaults(), std::string(kModelLabel));
  auto mirror = run_batch(generated, EvalMode::Mirror, engine, JudgePanel{cached_a, cached_b},
                          parallelism, PromptSet::defaults(), std::string(kModelLabel));
  entries.insert(entries.end(), mirror.begin(), mirror.end());
  for (const auto& e : entries) {
    if (e.failure) throw Error(e.failure->code, e.failure->message);
  }

  std::vector<std::filesystem::path> outputs;
  auto put = [&](const std::string& name, const std::string& contents) {
    write_text_file(out_dir / name, contents);
    outputs.push_back(out_dir / name);
  };
  std::string items_out;
  for (const auto& item : generated) items_out += item_to_json(item) + "\n";
  put("items.jsonl", items_out);
  put("annotations.jsonl", text("annotations.jsonl"));
  put("results.jsonl", results_to_jsonl(entries));
  const StatsFiles stats = compute_stats(entries, annotations, false);
  put("stats.jsonl", stats.stats_jsonl);
  put("consensus.jsonl", stats.consensus_jsonl);
  for (const auto& [name, contents] : render_report(stats.stats_jsonl)) put(name, contents);

  DemoSummary summary;
  summary.scripted_calls = scripted.load();
  summary.cache_hits = cached_gen->hits() + cached_a->hits() + cached_b->hits();
  summary.cache_misses = cached_gen->misses() + cached_a->misses() + cached_b->misses();
  summary.http_requests = HttpBackend::requests_issued() - http_before;

  RunManifest manifest;
  manifest.command = "demo";
  manifest.argv = {"demo", "--out-dir", out_dir.string()};
  manifest.config_digest = sha256_hex(llm_config_to_json(gen_config) + "\n" +
                                      llm_config_to_json(engine.judge_a) + "\n" +
                                      llm_config_to_json(engine.judge_b) + "\nmax_iterations=" +
                                      std::to_string(engine.max_iterations) + "\npolicy=" +
                                      std::string(to_string(engine.policy)));
  manifest.outputs = outputs;
  manifest.started_at = started;
  manifest.finished_at = utc_now();
  manifest.counters = {{"scripted_calls", summary.scripted_calls},
                       {"cache_hits", summary.cache_hits},
                       {"cache_misses", summary.cache_misses},
                       {"http_requests", summary.http_requests}};
  write_manifest(out_dir / "manifest.json", manifest);
  return summary;
}

}  // namespace qjudge::cli
