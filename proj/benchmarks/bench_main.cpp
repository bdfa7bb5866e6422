#include <benchmark/benchmark.h>

#include <random>

#include "qjudge/dataset.hpp"
#include "qjudge/engine.hpp"
#include "qjudge/parse.hpp"
#include "qjudge/prompts.hpp"
#include "qjudge/stats.hpp"

namespace {

std::string fixture(const std::string& name) {
  return qjudge::read_text_file(std::filesystem::path(QJUDGE_FIXTURE_DIR) / "transcripts" / name);
}

void BM_ParseTurn(benchmark::State& state) {
  const std::string text = fixture("economics_judge_a.txt");
  for (auto _ : state) benchmark::DoNotOptimize(qjudge::parse_turn(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseTurn);

void BM_Pearson(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(1, 5);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = d(rng);
    y[i] = 0.5 * x[i] + d(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(qjudge::pearson(x, y));
}
BENCHMARK(BM_Pearson)->Arg(50)->Arg(1000)->Arg(100000);

void BM_FleissKappa(benchmark::State& state) {
  std::mt19937 rng(2);
  const auto categories = qjudge::half_point_categories();
  std::vector<std::vector<int>> counts(static_cast<std::size_t>(state.range(0)),
                                       std::vector<int>(categories.size(), 0));
  for (auto& row : counts) {
    for (int r = 0; r < 3; ++r) ++row[rng() % categories.size()];
  }
  for (auto _ : state) benchmark::DoNotOptimize(qjudge::fleiss_kappa(counts, categories));
}
BENCHMARK(BM_FleissKappa)->Arg(100)->Arg(10000);

void BM_FeedbackPrompt(benchmark::State& state) {
  const std::string context(2000, 'c');
  const std::vector<std::string> strengths = {"Clear wording.", "Relevant to the context."};
  const std::vector<std::string> flaws = {"Too simple."};
  for (auto _ : state) {
    benchmark::DoNotOptimize(qjudge::build_feedback_prompt(context, "Why?", strengths, flaws));
  }
}
BENCHMARK(BM_FeedbackPrompt);

void BM_MirrorSession(benchmark::State& state) {
  const std::string reply = fixture("economics_judge_a.txt");
  qjudge::EngineConfig cfg;
  cfg.judge_a = qjudge::offline_config("a");
  cfg.judge_b = qjudge::offline_config("b");
  qjudge::QuestionItem item;
  item.id = "q";
  item.context = "Purchasing power parity (PPP) is an economic indicator.";
  item.question = "What does purchasing power parity do?";
  for (auto _ : state) {
    qjudge::ScriptedBackend a(std::vector<std::string>(3, reply));
    qjudge::ScriptedBackend b(std::vector<std::string>(2, reply));
    benchmark::DoNotOptimize(qjudge::evaluate_mirror(item, cfg, a, b));
  }
}
BENCHMARK(BM_MirrorSession);

}  // namespace

BENCHMARK_MAIN();
