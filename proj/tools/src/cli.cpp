#include "qjudge_cli/cli.hpp"

#include <algorithm>
#include <memory>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "manifest.hpp"
#include "pipeline.hpp"
#include "qjudge/dataset.hpp"
#include "qjudge/digest.hpp"
#include "qjudge/engine.hpp"
#include "qjudge/error.hpp"
#include "qjudge/llm.hpp"
#include "qjudge/results_io.hpp"
#include "qjudge/version.hpp"
#include "qjudge_cli/demo.hpp"

namespace qjudge::cli {

namespace {

namespace fs = std::filesystem;

/// A usage problem found after CLI11 accepted the flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Sampling {
  std::size_t sample = 0;  // 0 keeps every item
  std::uint64_t seed = 0;
};

struct GenerateOptions {
  std::string items;
  std::string model;
  std::string out;
  std::string cache_dir;
  std::string prompts;
  std::size_t parallelism = 1;
  Sampling sampling;
};

struct EvalOptions {
  std::string mode;
  std::string items;
  std::string judge_a;
  std::string judge_b;
  int max_iterations = 5;
  std::string policy = "strict";
  std::size_t parallelism = 1;
  std::string out;
  std::string label;
  std::string cache_dir;
  std::string prompts;
  bool omit_raw = false;
  Sampling sampling;
};

struct StatsOptions {
  std::vector<std::string> results;
  std::string annotations;
  std::string out_dir;
  bool integer_categories = false;
};

struct ReportOptions {
  std::string stats;
  std::string out_dir;
};

struct DemoOptions {
  std::string out_dir;
};

fs::path manifest_beside(const fs::path& out) {
  return fs::path(out.string() + ".manifest.json");
}

void add_sampling(CLI::App* cmd, Sampling& s) {
  auto* seed = cmd->add_option("--seed", s.seed, "Seed for --sample");
  cmd->add_option("--sample", s.sample, "Evaluate a seeded random sample of N items")
      ->check(CLI::PositiveNumber)
      ->needs(seed);
}

std::vector<QuestionItem> load_sampled(const std::string& path, const Sampling& s) {
  auto items = load_items(path);
  if (s.sample > 0) items = sample_items(items, s.sample, s.seed);
  return items;
}

PromptSet prompt_set(const std::string& dir) {
  return dir.empty() ? PromptSet::defaults() : PromptSet::with_overrides(dir);
}

std::shared_ptr<Backend> remote_backend(const std::string& cache_dir) {
  std::shared_ptr<Backend> backend = std::make_shared<HttpBackend>();
  if (!cache_dir.empty()) backend = with_cache(backend, cache_dir);
  return backend;
}

void add_cache_counters(RunManifest& m, const std::string& role, const Backend& backend) {
  if (const auto* cached = dynamic_cast<const CachedBackend*>(&backend)) {
    m.counters[role + "_cache_hits"] = cached->hits();
    m.counters[role + "_cache_misses"] = cached->misses();
  }
}

int run_generate(const GenerateOptions& o, const std::vector<std::string>& argv,
                 std::ostream& out, std::ostream& err) {
  RunManifest manifest{"generate", argv, {}, {}, {}, {}, utc_now(), {}, {}};
  const LlmConfig config = load_llm_config(o.model);
  const PromptSet prompts = prompt_set(o.prompts);
  const auto items = load_sampled(o.items, o.sampling);
  const std::uint64_t http_before = HttpBackend::requests_issued();
  auto backend = remote_backend(o.cache_dir);

  const auto entries = generate_batch(items, *backend, config, o.parallelism, prompts);
  std::string text;
  std::size_t failures = 0;
  for (const auto& e : entries) {
    text += item_to_json(e.item) + "\n";
    if (e.failure) {
      ++failures;
      err << "generate: " << e.failure->item_id << ": " << to_string(e.failure->code) << ": "
          << e.failure->message << "\n";
    }
  }
  write_text_file(o.out, text);
  out << "generated " << entries.size() - failures << " of " << entries.size()
      << " questions -> " << o.out << "\n";

  manifest.config_digest = sha256_hex(llm_config_to_json(config));
  if (o.sampling.sample > 0) manifest.seed = o.sampling.seed;
  manifest.inputs = {o.items, o.model};
  manifest.outputs = {o.out};
  manifest.counters = {{"items", entries.size()},
                       {"failures", failures},
                       {"http_requests", HttpBackend::requests_issued() - http_before}};
  add_cache_counters(manifest, "generator", *backend);
  manifest.finished_at = utc_now();
  write_manifest(manifest_beside(o.out), manifest);
  return kExitOk;
}

int run_eval(const EvalOptions& o, const std::vector<std::string>& argv, std::ostream& out,
             std::ostream& err) {
  const EvalMode mode = *parse_mode(o.mode);
  if (mode == EvalMode::Mirror && o.judge_b.empty()) {
    throw UsageError("--judge-b is required when --mode mirror");
  }
  if (mode == EvalMode::Direct && !o.judge_b.empty()) {
    throw UsageError("--judge-b is only valid with --mode mirror");
  }
  RunManifest manifest{"eval", argv, {}, {}, {}, {}, utc_now(), {}, {}};

  EngineConfig engine;
  engine.max_iterations = o.max_iterations;
  engine.policy = *parse_policy(o.policy);
  engine.judge_a = load_llm_config(o.judge_a);
  engine.judge_b = mode == EvalMode::Mirror ? load_llm_config(o.judge_b) : engine.judge_a;
  engine.validate(mode);
  const PromptSet prompts = prompt_set(o.prompts);
  const auto items = load_sampled(o.items, o.sampling);

  const std::uint64_t http_before = HttpBackend::requests_issued();
  JudgePanel judges{remote_backend(o.cache_dir), nullptr};
  if (mode == EvalMode::Mirror) judges.judge_b = remote_backend(o.cache_dir);

  const auto entries = run_batch(items, mode, engine, judges, o.parallelism, prompts, o.label);
  std::size_t failures = 0;
  for (const auto& e : entries) {
    if (!e.failure) continue;
    ++failures;
    err << "eval: " << e.item_id << ": " << to_string(e.failure->code) << ": "
        << e.failure->message << "\n";
  }
  write_results(o.out, entries, !o.omit_raw);
  out << "evaluated " << entries.size() - failures << " of " << entries.size() << " items ("
      << o.mode << ") -> " << o.out << "\n";

  std::string digest_input = "mode=" + o.mode + "\nmax_iterations=" +
                             std::to_string(engine.max_iterations) + "\npolicy=" + o.policy +
                             "\njudge_a=" + llm_config_to_json(engine.judge_a);
  if (mode == EvalMode::Mirror) digest_input += "\njudge_b=" + llm_config_to_json(engine.judge_b);
  manifest.config_digest = sha256_hex(digest_input);
  if (o.sampling.sample > 0) manifest.seed = o.sampling.seed;
  manifest.inputs = {o.items, o.judge_a};
  if (!o.judge_b.empty()) manifest.inputs.emplace_back(o.judge_b);
  manifest.outputs = {o.out};
  manifest.counters = {{"items", entries.size()},
                       {"failures", failures},
                       {"http_requests", HttpBackend::requests_issued() - http_before}};
  add_cache_counters(manifest, "judge_a", *judges.judge_a);
  if (judges.judge_b) add_cache_counters(manifest, "judge_b", *judges.judge_b);
  manifest.finished_at = utc_now();
  write_manifest(manifest_beside(o.out), manifest);
  return kExitOk;
}

int run_stats(const StatsOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
  RunManifest manifest{"stats", argv, {}, {}, {}, {}, utc_now(), {}, {}};
  std::vector<BatchEntry> entries;
  for (const auto& path : o.results) {
    auto loaded = load_results(path);
    entries.insert(entries.end(), loaded.begin(), loaded.end());
  }
  const auto annotations = load_annotations(o.annotations);
  const StatsFiles stats = compute_stats(entries, annotations, o.integer_categories);

  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  write_text_file(dir / "stats.jsonl", stats.stats_jsonl);
  write_text_file(dir / "consensus.jsonl", stats.consensus_jsonl);
  out << "wrote " << (dir / "stats.jsonl").string() << "\n";

  manifest.config_digest =
      sha256_hex(std::string("integer_categories=") + (o.integer_categories ? "1" : "0"));
  for (const auto& p : o.results) manifest.inputs.emplace_back(p);
  manifest.inputs.emplace_back(o.annotations);
  manifest.outputs = {dir / "stats.jsonl", dir / "consensus.jsonl"};
  manifest.counters = {{"results", entries.size()}, {"annotations", annotations.size()}};
  manifest.finished_at = utc_now();
  write_manifest(dir / "stats.manifest.json", manifest);
  return kExitOk;
}

int run_report(const ReportOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
  RunManifest manifest{"report", argv, {}, {}, {}, {}, utc_now(), {}, {}};
  const fs::path stats_path = fs::path(o.stats) / "stats.jsonl";
  const auto files = render_report(read_text_file(stats_path));
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  for (const auto& [name, contents] : files) {
    write_text_file(dir / name, contents);
    manifest.outputs.push_back(dir / name);
  }
  out << "wrote " << files.size() << " tables to " << dir.string() << "\n";
  manifest.config_digest = sha256_hex("report");
  manifest.inputs = {stats_path};
  manifest.finished_at = utc_now();
  write_manifest(dir / "report.manifest.json", manifest);
  return kExitOk;
}

int run_demo_command(const DemoOptions& o, std::ostream& out) {
  const DemoSummary s = run_demo(o.out_dir);
  out << "demo finished in " << o.out_dir << " (" << s.scripted_calls << " scripted replies, "
      << s.cache_hits << " cache hits)\n";
  return kExitOk;
}

const CLI::App* active_command(const CLI::App& app) {
  for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    if (sub->parsed()) return sub;
  }
  return &app;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score generated questions with LLM judges and compare them to human ratings",
               "qjudge"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Generate one question per context");
  generate->add_option("--items", gen.items, "Item JSONL")->required()->check(CLI::ExistingFile);
  generate->add_option("--model", gen.model, "Generator config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  generate->add_option("--out", gen.out, "Output item JSONL")->required();
  generate->add_option("--parallelism", gen.parallelism, "Concurrent requests")
      ->check(CLI::PositiveNumber);
  generate->add_option("--cache-dir", gen.cache_dir, "Response cache directory");
  generate->add_option("--prompts", gen.prompts, "Directory with prompt template overrides")
      ->check(CLI::ExistingDirectory);
  add_sampling(generate, gen.sampling);

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Score questions directly or with the two-judge loop");
  eval->add_option("--mode", ev.mode, "direct or mirror")
      ->required()
      ->check(CLI::IsMember({"direct", "mirror"}));
  eval->add_option("--items", ev.items, "Item JSONL with questions")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--judge-a", ev.judge_a, "Judge config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--judge-b", ev.judge_b, "Second judge config JSON (mirror only)")
      ->check(CLI::ExistingFile);
  eval->add_option("--max-iterations", ev.max_iterations, "Round cap for mirror")
      ->check(CLI::Range(1, 100));
  eval->add_option("--policy", ev.policy, "strict or simple")
      ->check(CLI::IsMember({"strict", "simple"}));
  eval->add_option("--parallelism", ev.parallelism, "Concurrent sessions")
      ->check(CLI::PositiveNumber);
  eval->add_option("--out", ev.out, "Output results JSONL")->required();
  eval->add_option("--label", ev.label, "Model label for reports");
  eval->add_option("--cache-dir", ev.cache_dir, "Response cache directory");
  eval->add_option("--prompts", ev.prompts, "Directory with prompt template overrides")
      ->check(CLI::ExistingDirectory);
  eval->add_flag("--omit-raw", ev.omit_raw, "Leave raw judge replies out of the results");
  add_sampling(eval, ev.sampling);

  StatsOptions st;
  auto* stats = app.add_subcommand("stats", "Means, correlation, exact match and kappa");
  stats->add_option("--results", st.results, "Results JSONL (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  stats->add_option("--annotations", st.annotations, "Human annotation JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  stats->add_option("--out-dir", st.out_dir, "Output directory")->required();
  stats->add_flag("--integer-categories", st.integer_categories,
                  "Use categories 1..5 for kappa instead of half points");

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Render tables from a stats directory");
  report->add_option("--stats", rep.stats, "Directory holding stats.jsonl")
      ->required()
      ->check(CLI::ExistingDirectory);
  report->add_option("--out-dir", rep.out_dir, "Output directory")->required();

  DemoOptions dm;
  auto* demo = app.add_subcommand("demo", "Run the whole pipeline on bundled data offline");
  demo->add_option("--out-dir", dm.out_dir, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << active_command(app)->help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << active_command(app)->help();
    return kExitUsage;
  }

  std::vector<std::string> argv = args;
  try {
    if (generate->parsed()) return run_generate(gen, argv, out, err);
    if (eval->parsed()) return run_eval(ev, argv, out, err);
    if (stats->parsed()) return run_stats(st, argv, out);
    if (report->parsed()) return run_report(rep, argv, out);
    if (demo->parsed()) return run_demo_command(dm, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n\n" << active_command(app)->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace qjudge::cli
