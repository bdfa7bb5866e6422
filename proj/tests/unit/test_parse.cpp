#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "json.hpp"
#include "qjudge/error.hpp"
#include "qjudge/parse.hpp"
#include "test_util.hpp"

namespace qjudge {
namespace {

using nlohmann::json;
using testing::judge_reply;
using testing::read_fixture;

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Io;
}

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const json& expectations() {
  static const json j = json::parse(read_fixture("transcripts/expected.json"));
  return j;
}

std::vector<std::string> fixture_files() {
  std::vector<std::string> files;
  for (const auto& e : expectations()) files.push_back(e.at("file").get<std::string>());
  return files;
}

const json& expectation_for(const std::string& file) {
  for (const auto& e : expectations()) {
    if (e.at("file") == file) return e;
  }
  throw std::runtime_error("no expectation for " + file);
}

class TranscriptFixture : public ::testing::TestWithParam<std::string> {};

TEST_P(TranscriptFixture, ScoresAndCritiqueCounts) {
  const json& e = expectation_for(GetParam());
  const std::string text = read_fixture("transcripts/" + GetParam());
  const ParsedTurn turn = parse_turn(text);
  for (MetricKind m : kAllMetrics) {
    EXPECT_EQ(turn.scores[m].value(), e.at("scores").at(std::string(metric_id(m))).get<double>())
        << metric_id(m);
  }
  ASSERT_EQ(turn.critique.strengths.size(), e.at("strengths").get<std::size_t>());
  ASSERT_EQ(turn.critique.flaws.size(), e.at("flaws").get<std::size_t>());
  EXPECT_EQ(turn.critique.strengths.front().rfind(e.at("first_strength").get<std::string>(), 0), 0u)
      << turn.critique.strengths.front();
  EXPECT_EQ(turn.critique.flaws.front().rfind(e.at("first_flaw").get<std::string>(), 0), 0u)
      << turn.critique.flaws.front();
  EXPECT_EQ(turn.raw_text, text);
}

INSTANTIATE_TEST_SUITE_P(Corpus, TranscriptFixture, ::testing::ValuesIn(fixture_files()),
                         [](const ::testing::TestParamInfo<std::string>& info) {
                           std::string name = info.param;
                           name = name.substr(0, name.find('.'));
                           for (char& c : name) {
                             if (c == '_') c = 'X';
                           }
                           return name;
                         });

TEST(ExtractScores, EconomicsValues) {
  const auto s = extract_scores(read_fixture("transcripts/economics_judge_a.txt"));
  EXPECT_EQ(s, ScoreVector::exact({5.0, 4.5, 5.0, 2.5, 2.0}));
}

TEST(ExtractScores, HistoryValues) {
  const auto s = extract_scores(read_fixture("transcripts/history_judge_a.txt"));
  EXPECT_EQ(s, ScoreVector::exact({3.5, 4.5, 5.0, 3.5, 4.0}));
}

TEST(ExtractScores, EarthScienceValues) {
  const auto s = extract_scores(read_fixture("transcripts/earth_science_judge_a.txt"));
  EXPECT_EQ(s, ScoreVector::exact({5.0, 5.0, 4.0, 2.0, 2.0}));
}

TEST(ExtractScores, EmptyStringNamesGrammaticality) {
  EXPECT_EQ(code_of([] { extract_scores(""); }), Errc::MissingMetric);
  EXPECT_NE(error_text([] { extract_scores(""); }).find("Grammaticality"), std::string::npos);
  EXPECT_EQ(code_of([] { parse_turn(""); }), Errc::MissingMetric);
}

TEST(ExtractScores, MissingLaterMetricIsNamed) {
  const std::string text = "Grammaticality: 5/5\nAppropriateness: 4/5\nRelevance: 4/5\nNovelty: 3/5\n";
  EXPECT_NE(error_text([&] { extract_scores(text); }).find("Complexity"), std::string::npos);
}

TEST(ExtractScores, FirstMatchWins) {
  const std::string text =
      "Grammaticality: 4/5\nAppropriateness: 4/5\nRelevance: 4/5\nNovelty: 3/5\nComplexity: 2/5\n"
      "On reflection, Grammaticality: 5/5\n"
      "Grammaticality: 1/5\n";
  EXPECT_EQ(extract_scores(text)[MetricKind::Grammaticality].value(), 4.0);
}

TEST(ExtractScores, ProseNumbersIgnored) {
  const std::string text =
      "In 1998 about 45% of 3 students scored 2 out of 5.\n"
      "The Grammaticality of this is 2/5 in prose.\n"
      "Grammaticality: 4\nAppropriateness - 3.5\nRelevance = 5 out of 5\n"
      "Novelty score: 2/5\nComplexity \xE2\x80\x93 3 / 5\n";
  EXPECT_EQ(extract_scores(text), ScoreVector::exact({4.0, 3.5, 5.0, 2.0, 3.0}));
}

TEST(ExtractScores, RoundsToHalfPoints) {
  const std::string text =
      "Grammaticality: 4.75/5\nAppropriateness: 4.2/5\nRelevance: 4.25/5\nNovelty: 1.1/5\n"
      "Complexity: 2.74/5\n";
  EXPECT_EQ(extract_scores(text), ScoreVector::exact({5.0, 4.0, 4.5, 1.0, 2.5}));
}

TEST(ExtractScores, ConflictingScoresOnOneLine) {
  const std::string text =
      "Grammaticality: 4/5 (earlier draft said 3/5)\nAppropriateness: 4/5\nRelevance: 4/5\n"
      "Novelty: 3/5\nComplexity: 2/5\n";
  EXPECT_EQ(code_of([&] { extract_scores(text); }), Errc::AmbiguousScore);
  const std::string consistent =
      "Grammaticality: 4/5, i.e. 4 out of 5\nAppropriateness: 4/5\nRelevance: 4/5\n"
      "Novelty: 3/5\nComplexity: 2/5\n";
  EXPECT_EQ(extract_scores(consistent)[MetricKind::Grammaticality].value(), 4.0);
  const std::string other_metric =
      "Grammaticality: 4/5 | Appropriateness: 3/5\nAppropriateness: 3/5\nRelevance: 4/5\nNovelty: 3/5\nComplexity: 2/5\n";
  EXPECT_EQ(extract_scores(other_metric)[MetricKind::Grammaticality].value(), 4.0);
}

TEST(ExtractScores, OutOfRange) {
  for (const char* g : {"Grammaticality: 6/5", "Grammaticality: 0/5", "Grammaticality: 7/10",
                        "Grammaticality: 8 out of 10"}) {
    const std::string text = std::string(g) +
                             "\nAppropriateness: 4/5\nRelevance: 4/5\nNovelty: 3/5\nComplexity: 2/5\n";
    EXPECT_EQ(code_of([&] { extract_scores(text); }), Errc::OutOfRange) << g;
  }
}

/// A canonical reply re-rendered with random case, emphasis and list markers.
std::string decorate(const ScoreVector& scores, std::mt19937& rng) {
  const std::vector<std::string> bullets = {"", "- ", "* ", "+ ", "\xE2\x80\xA2 ", "1. ", "2) ",
                                            "## ", "    "};
  const std::vector<std::pair<std::string, std::string>> emphasis = {
      {"", ""}, {"**", "**"}, {"__", "__"}, {"*", "*"}, {"`", "`"}};
  const std::vector<std::string> item_bullets = {"", "- ", "* ", "\xE2\x80\xA2 ", "3. ", "    "};
  const std::vector<std::string> scales = {"/5", " / 5", " out of 5", "/5.", ""};
  auto pick = [&rng](const auto& v) -> const auto& {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  std::string out = "Evaluation follows.\n\n";
  for (MetricKind m : kAllMetrics) {
    std::string name(metric_display_name(m));
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
      case 0: for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c))); break;
      case 1: for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c))); break;
      default: break;
    }
    const auto& [open, close] = pick(emphasis);
    const bool colon_inside = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    out += pick(bullets) + open + name + (colon_inside ? ":" + close : close + ":") + " " +
           testing::format_score(scores[m]) + pick(scales) + "\n";
    out += "    " + pick(bullets) + "Strengths: Fine.\n";
  }
  out += "\n" + pick(bullets) + "**Strengths in the Question Based on the Evaluation Scores:**\n";
  out += pick(item_bullets) + " Clear   wording. \n";
  out += "\n" + pick(bullets) + "Flaws in the question:\n";
  out += pick(item_bullets) + "__Too easy.__\n" + pick(item_bullets) + "None.\n";
  return out;
}

TEST(ExtractScores, InsensitiveToDecoration) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const ScoreVector scores = testing::random_scores(rng);
    const std::string text = decorate(scores, rng);
    ASSERT_EQ(extract_scores(text), scores) << text;
    const Critique c = extract_critique(text);
    ASSERT_EQ(c.strengths, std::vector<std::string>{"Clear wording."}) << text;
    ASSERT_EQ(c.flaws, std::vector<std::string>{"Too easy."}) << text;
  }
}

TEST(ExtractCritique, EconomicsSummary) {
  const auto c = extract_critique(read_fixture("transcripts/economics_judge_a.txt"));
  ASSERT_EQ(c.strengths.size(), 3u);
  ASSERT_EQ(c.flaws.size(), 2u);
  EXPECT_EQ(c.strengths[0],
            "Grammatical Correctness: The question is well-formed and free from grammatical errors.");
  EXPECT_EQ(c.flaws[0].rfind("Complexity", 0), 0u);
}

TEST(ExtractCritique, PerMetricFallbackAndNoneFilter) {
  const auto c = extract_critique("Strengths: The question is clear.\nFlaws: None.\n");
  EXPECT_EQ(c.strengths, std::vector<std::string>{"The question is clear."});
  EXPECT_TRUE(c.flaws.empty());
}

TEST(ExtractCritique, FallbackCollectsEveryMetricLine) {
  const std::string text =
      "Grammaticality: 5/5\n  Strengths: Correct.\n  Flaws: None.\n"
      "Novelty: 2/5\n  Strengths: N/A\n  Flaws:   Very   common. \n"
      "Complexity: 2/5\n  Strengths:\n  - Short.\n  - Direct.\n  Flaws: Shallow.\n";
  const auto c = extract_critique(text);
  EXPECT_EQ(c.strengths, (std::vector<std::string>{"Correct.", "Short.", "Direct."}));
  EXPECT_EQ(c.flaws, (std::vector<std::string>{"Very common.", "Shallow."}));
}

TEST(ExtractCritique, SummaryIsAuthoritative) {
  const std::string text =
      "Grammaticality: 5/5\n  Strengths: per-metric text\n"
      "Strengths in the question:\n- Summary strength\nFlaws in the question:\n- Summary flaw\n";
  const auto c = extract_critique(text);
  EXPECT_EQ(c.strengths, std::vector<std::string>{"Summary strength"});
  EXPECT_EQ(c.flaws, std::vector<std::string>{"Summary flaw"});
}

TEST(ExtractCritique, SectionEndsAtNextHeading) {
  const std::string text =
      "Strengths in the question:\n- A\n\n- B\nFlaws in the question:\n- C\n"
      "Overall recommendation:\nRewrite it.\n";
  const auto c = extract_critique(text);
  EXPECT_EQ(c.strengths, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(c.flaws, std::vector<std::string>{"C"});
}

TEST(ExtractCritique, NothingFound) {
  EXPECT_EQ(code_of([] { extract_critique("Grammaticality: 5/5\nLooks good to me."); }),
            Errc::NoCritiqueFound);
  EXPECT_EQ(code_of([] { extract_critique(""); }), Errc::NoCritiqueFound);
}

TEST(ParseTurn, BiologyTranscript) {
  const std::string text = read_fixture("transcripts/biology_judge_a.txt");
  const auto t = parse_turn(text);
  EXPECT_EQ(t.scores, ScoreVector::exact({5.0, 5.0, 5.0, 4.0, 3.0}));
  EXPECT_FALSE(t.critique.strengths.empty());
  EXPECT_EQ(t.raw_text, text);
}

TEST(ParseTurn, AllFlawsNone) {
  std::string text;
  for (MetricKind m : kAllMetrics) {
    text += std::string(metric_display_name(m)) + ": 4/5\n  Strengths: Good.\n  Flaws: None.\n";
  }
  const auto t = parse_turn(text);
  EXPECT_TRUE(t.critique.flaws.empty());
  EXPECT_EQ(t.critique.strengths.size(), 5u);
}

TEST(ParseTurn, PureAndItemsClean) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto text = judge_reply(testing::random_scores(rng),
                                  {"  - **Bold** strength \\", "\xE2\x80\xA2 glyph item"},
                                  {"1. numbered\tflaw", "None."});
    const auto a = parse_turn(text);
    EXPECT_EQ(a, parse_turn(text));
    for (const auto* list : {&a.critique.strengths, &a.critique.flaws}) {
      for (const auto& item : *list) {
        ASSERT_FALSE(item.empty());
        EXPECT_FALSE(std::isspace(static_cast<unsigned char>(item.front()))) << item;
        EXPECT_FALSE(std::isspace(static_cast<unsigned char>(item.back()))) << item;
        EXPECT_EQ(item.find("\xE2\x80\xA2"), std::string::npos) << item;
        EXPECT_NE(item.front(), '-');
        EXPECT_NE(item, "None.");
      }
    }
    EXPECT_EQ(a.critique.strengths, (std::vector<std::string>{"Bold strength", "glyph item"}));
    EXPECT_EQ(a.critique.flaws, std::vector<std::string>{"numbered flaw"});
  }
}

}  // namespace
}  // namespace qjudge
