#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "geo/visibility/improvement.hpp"
#include "geo/visibility/parse.hpp"
#include "geo/visibility/scoring.hpp"
#include "oracles.hpp"

using namespace geo;
using namespace geo::visibility;

namespace {

using oracle::SynthSentence;
using oracle::random_response;
using oracle::render;
using oracle::words;

std::string strip_ws(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!text::is_space(c)) out.push_back(c);
  return out;
}

}  // namespace

// ---- segmentation -----------------------------------------------------------

TEST(Segment, Examples) {
  EXPECT_EQ(segment_sentences("A b. C d!"), (std::vector<std::string>{"A b.", "C d!"}));
  EXPECT_EQ(segment_sentences("See Dr. Smith. Go."), (std::vector<std::string>{"See Dr. Smith.", "Go."}));
  EXPECT_EQ(segment_sentences("Warm. [2] Next one? Yes"), (std::vector<std::string>{"Warm. [2]", "Next one?", "Yes"}));
  EXPECT_EQ(segment_sentences("Pi is 3.14 today."), (std::vector<std::string>{"Pi is 3.14 today."}));
  EXPECT_TRUE(segment_sentences("  \n ").empty());
}

TEST(Segment, FiveHundredSentencesRecovered) {
  std::mt19937_64 gen(500);
  std::vector<SynthSentence> sentences;
  for (int i = 0; i < 500; ++i) {
    auto r = random_response(gen);
    sentences.push_back(r.front());
  }
  const auto text = render(sentences, gen);
  const auto segs = segment_sentences(text);
  ASSERT_EQ(segs.size(), 500u);
  std::string joined;
  for (const auto& s : segs) joined += s;
  EXPECT_EQ(strip_ws(joined), strip_ws(text));
}

// ---- citations --------------------------------------------------------------

TEST(Citations, Examples) {
  EXPECT_EQ(extract_citations("Beaches are warm [2].").indices, (std::set<int>{2}));
  EXPECT_EQ(extract_citations("Both agree [1][3].").indices, (std::set<int>{1, 3}));
  EXPECT_EQ(extract_citations("Sources [1, 3] and [2-4].").indices, (std::set<int>{1, 2, 3, 4}));
  EXPECT_EQ(extract_citations("En dash [1\xE2\x80\x93" "2].").indices, (std::set<int>{1, 2}));
}

TEST(Citations, OutOfRangeIgnoredAndReported) {
  const auto c = extract_citations("Odd [0] and [7] but [5].");
  EXPECT_EQ(c.indices, (std::set<int>{5}));
  EXPECT_EQ(c.ignored.size(), 2u);
}

TEST(Citations, NonNumericBracketsAreText) {
  EXPECT_TRUE(extract_citations("See [Tourism Board, 2020] and [a].").indices.empty());
  EXPECT_TRUE(extract_citations("Backwards [3-1].").indices.empty());
  EXPECT_EQ(count_words("Trips [Tourism Board, 2020] rock [2]."), 5u);
}

TEST(Words, CitationMarkersAndPunctuationAreNotWords) {
  EXPECT_EQ(count_words("Beaches are warm [2]."), 3u);
  EXPECT_EQ(count_words("A - b [1][2] ."), 2u);
  EXPECT_EQ(count_words("caf\xC3\xA9 ok"), 2u);
}

// ---- metrics ----------------------------------------------------------------

TEST(Metrics, Examples) {
  EXPECT_EQ(word_count_metric(parse_response("Nothing cited here."), 1), 0.0);
  const auto single = parse_response(words(7) + " [3].");
  EXPECT_EQ(word_count_metric(single, 3), 7.0);
  EXPECT_DOUBLE_EQ(adjusted_word_count_metric(single, 3), 7.0);

  const auto four = parse_response(words(6, "a") + " [1]. " + words(10, "b") + " [4]. " + words(3, "c") + ". " +
                                   words(2, "d") + ".");
  EXPECT_DOUBLE_EQ(adjusted_word_count_metric(four, 4), 7.5);

  // 10/8/12/6 words, source 2 cited at positions 0 and 2.
  const auto fixture = parse_response(words(10) + " [2]. " + words(8) + " [1]. " + words(12) + " [2][3]. " +
                                      words(6) + " [4].");
  EXPECT_EQ(word_count_metric(fixture, 2), 22.0);
  EXPECT_DOUBLE_EQ(adjusted_word_count_metric(fixture, 2), 16.0);
  EXPECT_THROW(adjusted_word_count_metric(parse_response(""), 1), precondition_error);
}

TEST(Metrics, MatchEnumerationOracle) {
  std::mt19937_64 gen(1000);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto synth = random_response(gen);
    const auto parsed = parse_response(render(synth, gen));
    ASSERT_EQ(parsed.total(), synth.size()) << trial;
    double sum_wc = 0;
    std::size_t cited_words = 0;
    bool multi = false;
    for (const auto& s : synth) {
      if (!s.cites.empty()) cited_words += s.words.size();
      multi |= s.cites.size() >= 2;
    }
    for (int source = 1; source <= kMaxSources; ++source) {
      const auto [wc, adj] = oracle::visibility_scores(synth, source);
      ASSERT_DOUBLE_EQ(word_count_metric(parsed, source), wc);
      ASSERT_NEAR(adjusted_word_count_metric(parsed, source), adj, 1e-9);
      ASSERT_LE(adjusted_word_count_metric(parsed, source), wc + 1e-12);
      ASSERT_GE(adjusted_word_count_metric(parsed, source), 0.0);
      sum_wc += wc;
    }
    ASSERT_GE(sum_wc, static_cast<double>(cited_words));
    ASSERT_EQ(sum_wc > static_cast<double>(cited_words), multi);
  }
}

TEST(Metrics, MovingCitingSentenceEarlierRaisesAdjusted) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto synth = random_response(gen);
    if (synth.size() < 2) continue;
    for (auto& s : synth) s.cites.erase(1);
    const std::size_t from = 1 + gen() % (synth.size() - 1);
    synth[from].cites.insert(1);
    const auto before = parse_response(render(synth, gen));
    std::swap(synth[from], synth[from - 1]);
    if (synth[from].cites.contains(1)) continue;  // both citing: nothing moved
    const auto after = parse_response(render(synth, gen));
    EXPECT_DOUBLE_EQ(word_count_metric(before, 1), word_count_metric(after, 1));
    EXPECT_GT(adjusted_word_count_metric(after, 1), adjusted_word_count_metric(before, 1));
  }
}

// ---- comparison and aggregation ---------------------------------------------

TEST(Compare, IdenticalResponsesGiveZero) {
  const auto r = parse_response("Alpha beta [1]. Gamma [2].");
  const auto q = compare_conditions(r, r, 1);
  EXPECT_FALSE(q.excluded);
  EXPECT_EQ(q.delta_wc, 0.0);
  EXPECT_EQ(q.delta_wc_adj, 0.0);
}

TEST(Compare, MovingTargetToFrontOnlyHelpsAdjusted) {
  const auto base = parse_response(words(4, "a") + " [1]. " + words(4, "b") + " [2]. " + words(4, "c") + " [3].");
  const auto treated = parse_response(words(4, "c") + " [3]. " + words(4, "a") + " [1]. " + words(4, "b") + " [2].");
  const auto q = compare_conditions(base, treated, 3);
  EXPECT_DOUBLE_EQ(q.delta_wc, 0.0);
  EXPECT_GT(q.delta_wc_adj, 0.0);
}

TEST(Compare, BaselineZeroExcluded) {
  const auto q = compare_conditions(parse_response("Uncited words here."), parse_response(words(5) + " [2]."), 2);
  ASSERT_TRUE(q.excluded);
  EXPECT_EQ(*q.excluded, ExclusionReason::baseline_zero);
}

TEST(Compare, ScoresAreShareOfVoice) {
  // Baseline: target has 2 of 4 words; treated: 3 of 4 words.
  const auto q = compare_conditions(parse_response("a b [1]. c d [2]."), parse_response("a b c [1]. d [2]."), 1);
  EXPECT_DOUBLE_EQ(q.delta_wc, (0.75 - 0.5) / 0.5);
}

namespace {
QueryImprovement imp(double wc, double adj) {
  QueryImprovement q;
  q.delta_wc = wc;
  q.delta_wc_adj = adj;
  return q;
}
}  // namespace

TEST(Aggregate, AllEqual) {
  const auto r = aggregate(std::vector<QueryImprovement>(10, imp(0.2, 0.3)));
  EXPECT_EQ(r.included, 10u);
  EXPECT_DOUBLE_EQ(r.mean_delta_wc, 0.2);
  EXPECT_DOUBLE_EQ(r.mean_delta_wc_adj, 0.3);
}

TEST(Aggregate, ExtremeValueExcluded) {
  std::vector<QueryImprovement> v(49, imp(0.10, 0.10));
  v.push_back(imp(40.0, 40.0));
  const auto r = aggregate(v);
  EXPECT_EQ(r.included, 49u);
  EXPECT_NEAR(r.mean_delta_wc, 0.10, 1e-12);
  ASSERT_TRUE(r.per_query.back().excluded);
  EXPECT_EQ(*r.per_query.back().excluded, ExclusionReason::outlier);
  EXPECT_EQ(aggregate(v, OutlierPolicy::parse("none")).included, 50u);
}

TEST(Aggregate, ModifiedZScoresHandComputed) {
  // median 3, |dev| = {2,1,0,1,97}, MAD 1.
  const auto z = modified_z_scores({1, 2, 3, 4, 100});
  EXPECT_NEAR(z[0], -1.349, 1e-12);
  EXPECT_NEAR(z[4], 0.6745 * 97, 1e-9);
}

TEST(Aggregate, OutlierInEitherMetricExcludes) {
  std::vector<QueryImprovement> v(9, imp(0.1, 0.2));
  v[0] = imp(0.11, 0.21);
  v.push_back(imp(0.1, 50.0));
  const auto r = aggregate(v);
  EXPECT_TRUE(r.per_query.back().excluded);
}

TEST(Aggregate, NothingLeftIsAnError) {
  std::vector<QueryImprovement> v(3, imp(0, 0));
  for (auto& q : v) q.excluded = ExclusionReason::baseline_zero;
  EXPECT_THROW(aggregate(v), precondition_error);
}

TEST(Aggregate, PolicyParsing) {
  EXPECT_EQ(OutlierPolicy::parse("mad3.5").threshold, 3.5);
  EXPECT_EQ(OutlierPolicy::parse("mad2").name(), "mad2");
  EXPECT_EQ(OutlierPolicy::parse("none").kind, OutlierPolicy::Kind::none);
  EXPECT_THROW(OutlierPolicy::parse("iqr"), config_error);
}
