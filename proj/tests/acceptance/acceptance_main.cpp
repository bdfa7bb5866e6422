// Acceptance checks. One line per criterion; exit status 1 if any fails.
// Criterion 6 talks to a real endpoint and runs only when
// QJUDGE_LIVE_JUDGE_A (and optionally QJUDGE_LIVE_JUDGE_B) name judge configs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "qjudge/engine.hpp"
#include "qjudge/error.hpp"
#include "qjudge/report.hpp"
#include "qjudge/results_io.hpp"
#include "qjudge/stats.hpp"
#include "qjudge_cli/cli.hpp"
#include "qjudge_cli/demo.hpp"
#include "stat_oracles.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qjudge;

namespace {

constexpr double kPearsonTolerance = 1e-9;
constexpr double kKappaTolerance = 1e-12;
constexpr int kPearsonCases = 1000;
constexpr int kKappaCases = 500;

/// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

enum class Verdict { Pass, Fail, Skip };

struct Criterion {
  int number;
  std::string title;
  double limit_s;  // 0 = no limit
  std::function<Verdict(Check&)> body;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// 1

Verdict parser_fixtures(Check& c) {
  const auto expected = json::parse(testing::read_fixture("transcripts/expected.json"));
  c.expect(expected.size() == 8, "expected 8 fixtures, found " + std::to_string(expected.size()));
  for (const auto& e : expected) {
    const std::string file = e.at("file");
    try {
      const auto turn = parse_turn(testing::read_fixture("transcripts/" + file));
      for (MetricKind m : kAllMetrics) {
        const double want = e.at("scores").at(std::string(metric_id(m)));
        c.expect(turn.scores[m].value() == want,
                 file + " " + std::string(metric_id(m)) + " = " + fmt(turn.scores[m].value()));
      }
      c.expect(turn.critique.strengths.size() == e.at("strengths").get<std::size_t>(),
               file + " strengths count");
      c.expect(turn.critique.flaws.size() == e.at("flaws").get<std::size_t>(),
               file + " flaws count");
      c.expect(!turn.critique.strengths.empty() &&
                   turn.critique.strengths[0].rfind(e.at("first_strength").get<std::string>(), 0) == 0,
               file + " first strength");
      c.expect(!turn.critique.flaws.empty() &&
                   turn.critique.flaws[0].rfind(e.at("first_flaw").get<std::string>(), 0) == 0,
               file + " first flaw");
    } catch (const Error& err) {
      c.expect(false, file + ": " + err.what());
    }
  }
  return Verdict::Pass;
}

// 2

EngineConfig engine_config(ConvergencePolicy policy, int cap = 5) {
  EngineConfig cfg;
  cfg.policy = policy;
  cfg.max_iterations = cap;
  cfg.judge_a = offline_config("judge-a");
  cfg.judge_b = offline_config("judge-b");
  return cfg;
}

bool ends_agreeing(const SessionResult& r) {
  const auto n = r.transcript.size();
  return n >= 3 && r.transcript[n - 1].role == EvaluatorRole::JudgeA &&
         r.transcript[n - 2].role == EvaluatorRole::JudgeB &&
         r.transcript[n - 1].parsed.scores == r.transcript[n - 2].parsed.scores;
}

Verdict mirror_matrix(Check& c) {
  const auto item = testing::make_item("econ", "Purchasing power parity ...",
                                       "What does purchasing power parity do?");
  const auto text = testing::read_fixture("transcripts/economics_judge_a.txt");
  const std::vector<std::string> constant(11, text);

  struct Case {
    ConvergencePolicy policy;
    std::size_t completions;
    int iterations;
  };
  for (const Case& k : {Case{ConvergencePolicy::Simple, 3, 1}, Case{ConvergencePolicy::Strict, 5, 2}}) {
    ScriptedBackend a(constant), b(constant);
    const auto r = evaluate_mirror(item, engine_config(k.policy), a, b);
    const std::string tag = std::string(to_string(k.policy)) + ": ";
    c.expect(r.converged, tag + "not converged");
    c.expect(r.iterations_used == k.iterations, tag + "iterations " + std::to_string(r.iterations_used));
    c.expect(a.calls() + b.calls() == k.completions,
             tag + "completions " + std::to_string(a.calls() + b.calls()));
    c.expect(ends_agreeing(r), tag + "last JudgeA/JudgeB differ");
  }

  const auto x = ScoreVector::exact({5.0, 4.5, 5.0, 2.5, 2.0});
  const auto y = ScoreVector::exact({4.0, 4.0, 4.0, 3.0, 3.0});
  std::vector<std::string> alternating;
  for (int i = 0; i < 6; ++i) alternating.push_back(testing::judge_reply(i % 2 ? y : x));
  ScriptedBackend a(alternating), b(std::vector<std::string>(5, testing::judge_reply(x)));
  const auto r = evaluate_mirror(item, engine_config(ConvergencePolicy::Strict, 5), a, b);
  c.expect(!r.converged, "alternating: converged");
  c.expect(r.iterations_used == 5, "alternating: iterations " + std::to_string(r.iterations_used));
  c.expect(a.calls() + b.calls() == 11,
           "alternating: completions " + std::to_string(a.calls() + b.calls()));

  // (c) over random scripts: every converged session ends with equal vectors.
  std::mt19937 rng(31);
  int converged = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int cap = 1 + static_cast<int>(rng() % 5);
    const ScoreVector pool[2] = {x, testing::random_scores(rng)};
    std::vector<std::string> sa, sb;
    for (int i = 0; i <= cap; ++i) sa.push_back(testing::judge_reply(pool[rng() % 2]));
    for (int i = 0; i < cap; ++i) sb.push_back(testing::judge_reply(pool[rng() % 2]));
    ScriptedBackend ra(sa), rb(sb);
    const auto policy = trial % 2 ? ConvergencePolicy::Strict : ConvergencePolicy::Simple;
    const auto s = evaluate_mirror(item, engine_config(policy, cap), ra, rb);
    if (s.converged) {
      ++converged;
      c.expect(ends_agreeing(s), "random trial " + std::to_string(trial) + " ends disagreeing");
    }
    c.expect(ra.calls() + rb.calls() <= 1u + 2u * static_cast<unsigned>(cap),
             "random trial " + std::to_string(trial) + " exceeded the completion bound");
  }
  c.expect(converged > 0, "no random trial converged");
  return Verdict::Pass;
}

// 3

Verdict stats_oracles(Check& c) {
  const std::vector<double> fx = {1, 2, 3, 4, 5}, fy = {2, 2, 3, 5, 5};
  c.expect(std::abs(pearson(fx, fy) - 9.0 / std::sqrt(92.0)) <= kPearsonTolerance,
           "fixed pearson " + fmt(pearson(fx, fy)));

  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < kPearsonCases; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 50)(rng);
    std::uniform_int_distribution<long long> pick(-500, 500);
    std::vector<long long> xi(n), yi(n);
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      xi[i] = pick(rng);
      yi[i] = trial % 4 == 0 ? xi[i] + pick(rng) / 20 : pick(rng);
      x[i] = static_cast<double>(xi[i]) / 10.0;
      y[i] = static_cast<double>(yi[i]) / 10.0;
    }
    const auto want = oracle::pearson_exact(xi, yi);
    if (!want) continue;
    ++compared;
    const double got = pearson(x, y);
    if (std::abs(got - static_cast<double>(*want)) > kPearsonTolerance) {
      c.expect(false, "pearson trial " + std::to_string(trial) + ": " + fmt(got) + " vs " +
                          fmt(static_cast<double>(*want)));
    }
  }
  c.expect(compared >= kPearsonCases * 9 / 10, "too few pearson comparisons");

  c.expect(std::abs(fleiss_kappa({{3, 0}, {1, 2}}, {1, 2}).kappa - 0.25) <= kKappaTolerance,
           "fixed kappa");
  c.expect(fleiss_kappa({{3, 0, 0}, {0, 3, 0}, {0, 0, 3}}, {1, 2, 3}).kappa == 1.0,
           "perfect agreement kappa");

  std::mt19937 r32(77);
  int kappas = 0;
  for (int trial = 0; trial < kKappaCases; ++trial) {
    const int items = 1 + static_cast<int>(r32() % 10);
    const int raters = 2 + static_cast<int>(r32() % 4);
    const int k = 2 + static_cast<int>(r32() % 8);
    std::vector<std::vector<int>> counts(items, std::vector<int>(k, 0));
    const int bias = static_cast<int>(r32() % k);
    for (auto& row : counts) {
      for (int i = 0; i < raters; ++i) ++row[r32() % 3 == 0 ? bias : static_cast<int>(r32() % k)];
    }
    std::vector<double> cats(k);
    for (int j = 0; j < k; ++j) cats[j] = j + 1;
    const auto want = oracle::fleiss_exact(counts);
    if (!want) continue;
    ++kappas;
    const double got = fleiss_kappa(counts, cats).kappa;
    if (std::abs(got - static_cast<double>(want->to_long_double())) > kKappaTolerance) {
      c.expect(false, "kappa trial " + std::to_string(trial) + ": " + fmt(got));
    }
  }
  c.expect(kappas >= kKappaCases * 9 / 10, "too few kappa comparisons");
  return Verdict::Pass;
}

// 4

std::map<std::string, std::string> read_tree(const fs::path& root, const std::string& skip) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root).generic_string();
    if (rel != skip) files[rel] = read_text_file(entry.path());
  }
  return files;
}

const TableRow* find_row(const TableSpec& t, const std::string& group) {
  for (const auto& r : t.rows) {
    if (r.group == group) return &r;
  }
  return nullptr;
}

/// Exact-match percentages straight from annotations and results, using
/// integer half-point arithmetic only.
std::array<double, kMetricCount> independent_exact_match(const std::vector<BatchEntry>& entries,
                                                         EvalMode mode) {
  std::map<std::string, std::array<int, kMetricCount>> sums;
  std::map<std::string, int> counts;
  for (const auto& a : cli::demo_annotations()) {
    auto& s = sums[a.item_id];
    for (MetricKind m : kAllMetrics) s[static_cast<std::size_t>(m)] += a.scores[m].halves();
    ++counts[a.item_id];
  }
  std::array<int, kMetricCount> hits{};
  int n = 0;
  for (const auto& e : entries) {
    if (!e.result || e.result->mode != mode) continue;
    ++n;
    const auto& s = sums.at(e.item_id);
    const int k = counts.at(e.item_id);
    for (MetricKind m : kAllMetrics) {
      const int total = s[static_cast<std::size_t>(m)];
      // Round total/k half-points to the nearest half point, ties up.
      const int rounded = (2 * total + k) / (2 * k);
      if (rounded == e.result->final_scores[m].halves()) ++hits[static_cast<std::size_t>(m)];
    }
  }
  std::array<double, kMetricCount> out{};
  for (std::size_t i = 0; i < kMetricCount; ++i) out[i] = 100.0 * hits[i] / n;
  return out;
}

Verdict demo_pipeline(Check& c) {
  testing::TempDir tmp;
  const fs::path dir = tmp / "demo";
  std::ostringstream out, err;
  const int code = cli::run({"demo", "--out-dir", dir.string()}, out, err);
  c.expect(code == cli::kExitOk, "demo exit " + std::to_string(code) + ": " + err.str());
  if (code != cli::kExitOk) return Verdict::Pass;

  // Hand-computed means of the bundled judges' final scores over 5 items.
  const std::map<std::string, std::array<double, 5>> means = {
      {"direct", {4.7, 4.7, 4.8, 3.0, 2.9}}, {"mirror", {4.7, 4.7, 4.8, 3.1, 2.9}}};
  const auto scores = parse_csv(read_text_file(dir / "scores.csv"));
  for (const auto& [group, want] : means) {
    const TableRow* row = find_row(scores, group);
    c.expect(row != nullptr, "scores.csv lacks " + group);
    if (!row) continue;
    for (std::size_t i = 0; i < kMetricCount; ++i) {
      c.expect(row->values[i] && format_value(*row->values[i]) == format_value(want[i]),
               "scores " + group + " column " + std::to_string(i));
    }
  }
  const auto entries = load_results(dir / "results.jsonl");
  for (const auto& g : aggregate_means([&] {
         std::vector<SessionResult> rs;
         for (const auto& e : entries) {
           if (e.result) rs.push_back(*e.result);
         }
         return rs;
       }())) {
    const auto& want = means.at(std::string(to_string(g.mode)));
    for (std::size_t i = 0; i < kMetricCount; ++i) {
      // Sums of half points over 5 items are exact in binary; allow only
      // the division's rounding.
      c.expect(std::abs(g.means.values[i] - want[i]) <= 1e-15,
               "mean " + std::string(to_string(g.mode)) + " column " + std::to_string(i) + " = " +
                   fmt(g.means.values[i]));
    }
    c.expect(g.n == 5, "group size " + std::to_string(g.n));
  }

  const std::map<std::string, std::array<double, 5>> hand_match = {
      {"direct", {80, 100, 80, 80, 80}}, {"mirror", {80, 100, 80, 100, 80}}};
  const auto exact = parse_csv(read_text_file(dir / "exact_match.csv"));
  for (const auto& [group, want] : hand_match) {
    const auto independent = independent_exact_match(entries, *parse_mode(group));
    const TableRow* row = find_row(exact, group);
    c.expect(row != nullptr, "exact_match.csv lacks " + group);
    if (!row) continue;
    for (std::size_t i = 0; i < kMetricCount; ++i) {
      c.expect(independent[i] == want[i], "independent exact match " + group + " " + std::to_string(i));
      c.expect(row->values[i] && *row->values[i] == want[i],
               "exact_match.csv " + group + " column " + std::to_string(i));
    }
  }

  const auto corr = parse_csv(read_text_file(dir / "correlations.csv"));
  c.expect(corr.rows.size() == 2, "correlation rows " + std::to_string(corr.rows.size()));
  for (const auto& row : corr.rows) {
    for (const auto& v : row.values) {
      if (v) c.expect(*v >= -1.0 && *v <= 1.0, "r out of range " + fmt(*v));
    }
  }

  const auto before = read_tree(dir, "manifest.json");
  const auto http_before = HttpBackend::requests_issued();
  const cli::DemoSummary warm = cli::run_demo(dir);
  const auto after = read_tree(dir, "manifest.json");
  c.expect(warm.scripted_calls == 0, "warm rerun reached the canned judges " +
                                         std::to_string(warm.scripted_calls) + " times");
  c.expect(warm.cache_misses == 0, "warm rerun missed the cache");
  c.expect(warm.http_requests == 0 && HttpBackend::requests_issued() == http_before,
           "network requests issued");
  c.expect(before == after, "warm rerun changed output files");
  return Verdict::Pass;
}

// 5

Verdict parallel_determinism(Check& c) {
  std::vector<QuestionItem> items;
  for (int i = 0; i < 40; ++i) {
    items.push_back(testing::make_item("item-" + std::to_string(i),
                                       "Context " + std::to_string(i * 7919) + ".", "Question?"));
  }
  // Replies depend only on the prompt, with frequent agreement after round 1.
  auto reply = [](const std::string& prompt) {
    const auto pos = prompt.find("Context ");
    const std::string key = prompt.find("Prior strengths:") != std::string::npos
                                ? prompt.substr(pos, 16)
                                : prompt;
    return testing::judge_reply(testing::scores_from_text(key), {"S " + key.substr(0, 12)},
                                {"F"});
  };
  const auto cfg = engine_config(ConvergencePolicy::Strict);

  std::map<std::size_t, std::string> serialized;
  testing::TempDir cold_a, cold_b;
  auto inner_a = std::make_shared<testing::FunctionBackend>(reply);
  auto cached_a = with_cache(inner_a, cold_a.path());
  auto inner_b = std::make_shared<testing::FunctionBackend>(reply);
  auto cached_b = with_cache(inner_b, cold_b.path());

  for (auto mode : {EvalMode::Direct, EvalMode::Mirror}) {
    const auto p1 = results_to_jsonl(run_batch(items, mode, cfg, {cached_a, cached_a}, 1));
    const auto p8_cold = results_to_jsonl(run_batch(items, mode, cfg, {cached_b, cached_b}, 8));
    const int warm_before = inner_a->calls();
    const auto p8_warm = results_to_jsonl(run_batch(items, mode, cfg, {cached_a, cached_a}, 8));
    const std::string tag(to_string(mode));
    c.expect(p1 == p8_cold, tag + ": parallelism 8 (cold cache) differs from 1");
    c.expect(p1 == p8_warm, tag + ": parallelism 8 (warm cache) differs from 1");
    c.expect(inner_a->calls() == warm_before, tag + ": warm run called the backend");
    c.expect(p1.find("\"error\"") == std::string::npos, tag + ": failed entries");
  }
  return Verdict::Pass;
}

// 6

Verdict live_smoke(Check& c) {
  const char* path_a = std::getenv("QJUDGE_LIVE_JUDGE_A");
  if (path_a == nullptr || *path_a == '\0') return Verdict::Skip;
  const char* path_b = std::getenv("QJUDGE_LIVE_JUDGE_B");
  EngineConfig cfg;
  cfg.judge_a = load_llm_config(path_a);
  cfg.judge_b = path_b != nullptr && *path_b != '\0' ? load_llm_config(path_b) : cfg.judge_a;
  std::vector<QuestionItem> items;
  for (const auto& item : cli::demo_items()) {
    if (items.size() == 2) break;
    items.push_back(item);
  }
  items[0].question = "What does purchasing power parity do?";
  items[1].question = "How did Islamic rule shape medieval Indian architecture?";
  auto backend = std::make_shared<HttpBackend>();
  const auto entries = run_batch(items, EvalMode::Mirror, cfg, {backend, backend}, 2);
  for (const auto& e : entries) {
    c.expect(e.ok(), e.item_id + ": " + (e.failure ? e.failure->message : ""));
    if (!e.ok()) continue;
    c.expect(e.result->converged || e.result->iterations_used == cfg.max_iterations,
             e.item_id + ": neither converged nor capped");
  }
  return Verdict::Pass;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "parser fixtures", 1.0, parser_fixtures},
      {2, "mirror control flow", 1.0, mirror_matrix},
      {3, "statistics oracles", 10.0, stats_oracles},
      {4, "end-to-end demo", 5.0, demo_pipeline},
      {5, "determinism under parallelism", 5.0, parallel_determinism},
      {6, "live smoke (opt-in)", 0.0, live_smoke},
  };
  bool all_ok = true;
  for (const auto& cr : criteria) {
    Check check;
    Verdict verdict;
    const auto start = std::chrono::steady_clock::now();
    try {
      verdict = cr.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
      verdict = Verdict::Fail;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!check.failures.empty()) verdict = Verdict::Fail;
    if (verdict == Verdict::Pass && cr.limit_s > 0 && secs > cr.limit_s) {
      check.failures.push_back("took " + fmt(secs) + " s, limit " + fmt(cr.limit_s) + " s");
      verdict = Verdict::Fail;
    }
    const char* label = verdict == Verdict::Pass ? "PASS" : verdict == Verdict::Fail ? "FAIL" : "SKIP";
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.3f", secs);
    std::cout << "criterion " << cr.number << ": " << label << "  " << cr.title << " (" << timing
              << " s)";
    if (verdict == Verdict::Skip) std::cout << " set QJUDGE_LIVE_JUDGE_A to enable";
    std::cout << "\n";
    for (std::size_t i = 0; i < check.failures.size() && i < 10; ++i) {
      std::cout << "    " << check.failures[i] << "\n";
    }
    if (verdict == Verdict::Fail) all_ok = false;
  }
  return all_ok ? 0 : 1;
}
