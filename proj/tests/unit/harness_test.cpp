#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geo/common/error.hpp"
#include "geo/common/digest.hpp"
#include "geo/harness/config.hpp"
#include "geo/harness/parallel.hpp"
#include "geo/harness/pipeline.hpp"
#include "geo/harness/report.hpp"
#include "geo/harness/unigram.hpp"
#include "geo/textmetrics/likelihood.hpp"
#include "test_util.hpp"

using namespace geo;
using namespace geo::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kMockConf = fs::path(GEO_FIXTURE_DIR) / "mock_run.conf";

RunConfig mock_config(const fs::path& out, KeyValues extra = {}) {
  extra["output.dir"] = fs::absolute(out).string();
  return load_run_config(kMockConf, extra);
}

std::string slurp(const fs::path& p) { return read_file(p); }

}  // namespace

TEST(Unigram, HandCorpusIncludesUnknownType) {
  const auto lm = fit_unigram({"a a a b"}, 1.0);
  EXPECT_EQ(lm.total, 4u);
  EXPECT_EQ(lm.vocab_size(), 2u);
  EXPECT_DOUBLE_EQ(lm.probability("a"), 4.0 / 7.0);
  EXPECT_DOUBLE_EQ(lm.probability("b"), 2.0 / 7.0);
  EXPECT_DOUBLE_EQ(lm.unknown_probability(), 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(lm.probability("zzz"), lm.unknown_probability());
  EXPECT_NEAR(lm.probability("a") + lm.probability("b") + lm.unknown_probability(), 1.0, 1e-15);
}

TEST(Unigram, SingleRepeatedTokenWithoutSmoothingHasPerplexityOne) {
  const auto lm = fit_unigram({"x x x x"}, 0.0);
  EXPECT_DOUBLE_EQ(textmetrics::perplexity(score_text(lm, "x x x")), 1.0);
}

TEST(Unigram, UniformTypesGiveVocabularySizedPerplexity) {
  std::string text;
  for (int i = 0; i < 16; ++i) text += "t" + std::to_string(i) + " ";
  const auto lm = fit_unigram({text}, 0.0);
  EXPECT_NEAR(textmetrics::perplexity(score_text(lm, text)), 16.0, 1e-9);
}

TEST(Unigram, RejectsBadInput) {
  EXPECT_THROW(fit_unigram({}), precondition_error);
  EXPECT_THROW(fit_unigram({"a"}, -1.0), precondition_error);
  EXPECT_THROW(fit_unigram({" ... "}), precondition_error);
}

TEST(Config, ParsesKeyValuesAndComments) {
  const auto kv = parse_key_values("# comment\n a = 1 \n\nb=two words\n");
  EXPECT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("a"), "1");
  EXPECT_EQ(kv.at("b"), "two words");
  EXPECT_THROW(parse_key_values("no equals here"), config_error);
  EXPECT_THROW(parse_key_values(" = v"), config_error);
}

TEST(Config, LoadsFixtureAndAppliesOverrides) {
  const auto cfg = mock_config("/tmp/unused", {{"split.seed", "3"}});
  EXPECT_EQ(cfg.split.seed, 3u);
  EXPECT_EQ(cfg.split.test_queries, 10u);
  EXPECT_EQ(cfg.engine_mode, "mock");
  EXPECT_EQ(cfg.seeds().at("geo_eval"), 42u);
  EXPECT_FALSE(cfg.reportable().contains("output.dir"));
  EXPECT_EQ(cfg.output_dir, fs::path("/tmp/unused"));
}

TEST(Config, RejectsInvalidConfigurations) {
  EXPECT_THROW(load_run_config("/nonexistent/run.conf"), config_error);
  EXPECT_THROW(mock_config("/tmp/x", {{"corpus.fixtures", "/nonexistent/corpus"}}), config_error);
  EXPECT_THROW(mock_config("/tmp/x", {{"no.such.key", "1"}}), config_error);
  EXPECT_THROW(mock_config("/tmp/x", {{"engine.mode", "live"}}), config_error);
  EXPECT_THROW(mock_config("/tmp/x", {{"engine.mode", "other"}}), config_error);
  EXPECT_THROW(mock_config("/tmp/x", {{"split.train_fraction", "1.5"}}), config_error);
  EXPECT_THROW(mock_config("/tmp/x", {{"split.seed", "abc"}}), config_error);
  EXPECT_THROW(mock_config("/tmp/x", {{"geo_eval.scope", "train"}}), config_error);

  auto kv = parse_key_values(slurp(kMockConf));
  kv.erase("output.dir");
  EXPECT_THROW(make_run_config(kv, kMockConf.parent_path()), config_error);
}

TEST(Manifest, RoundTripsAndDigestIgnoresTimestamps) {
  Manifest m;
  m.seeds = {{"split", 1}, {"engine", 2}};
  m.stages.push_back({"ingest", "k1", {{"corpus", "d0"}}, {{"documents.jsonl", "d1"}}, "t0", "t1"});
  m.stages.push_back({"clean", "k2", {{"documents.jsonl", "d1"}}, {{"dataset_raw.csv", "d2"}}, "t2", "t3"});

  const auto back = Manifest::parse(m.to_string());
  EXPECT_EQ(back.to_string(), m.to_string());
  EXPECT_EQ(back.digest(), m.digest());

  auto later = m;
  later.stages[0].started = "other";
  later.stages[1].finished = "other";
  EXPECT_EQ(later.digest(), m.digest());

  later.upsert({"clean", "k3", {}, {}, "", ""});
  EXPECT_EQ(later.stages.size(), 2u);
  EXPECT_EQ(later.find("clean")->key, "k3");
  EXPECT_NE(later.digest(), m.digest());
  EXPECT_EQ(later.find("report"), nullptr);
}

TEST(Parallel, CoversEveryIndexOnceAndRethrows) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);

  EXPECT_THROW(parallel_for(100, 3,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Report, NoSurvivorsAndPaperBlock) {
  ReportInputs in;
  in.config = {{"k", "v|w"}};
  in.seeds = {{"split", 1}};
  in.metrics = {{"condition", "mock"}, {"n", 3}, {"rouge_l", 0.5}, {"bleu", 0.25}, {"ppl", 10.0},
                {"length_ratio", 1.0}, {"ppl_source", "unigram"}};
  in.geo_eval = {{"outlier_policy", "mad3.5"}, {"seed", 42}, {"evaluated", 2}, {"included", 0},
                 {"mean_delta_wc", nullptr}, {"mean_delta_wc_adj", nullptr}};
  const auto a = emit_report(in);
  const auto b = emit_report(in);
  EXPECT_EQ(a.markdown, b.markdown);
  EXPECT_EQ(a.json, b.json);
  EXPECT_NE(a.markdown.find(kNoSurvivorsMarker), std::string::npos);
  EXPECT_NE(a.markdown.find(kPaperBlockTitle), std::string::npos);
  EXPECT_NE(a.markdown.find("v\\|w"), std::string::npos);
  EXPECT_NE(a.markdown.find("not the perplexity of a trained sequence model"), std::string::npos);
  const auto j = nlohmann::json::parse(a.json);
  EXPECT_TRUE(j.at("visibility").at("no_queries_survived").get<bool>());
  EXPECT_FALSE(j.at("paper_reference").at("reproduced").get<bool>());

  in.geo_eval["included"] = 2;
  in.geo_eval["mean_delta_wc"] = 0.1;
  in.geo_eval["mean_delta_wc_adj"] = 0.2;
  const auto c = emit_report(in);
  EXPECT_EQ(c.markdown.find(kNoSurvivorsMarker), std::string::npos);
}

TEST(Pipeline, MockRunIsReproducibleAndResumable) {
  const auto d1 = test_util::temp_dir("pipe-a");
  const auto d2 = test_util::temp_dir("pipe-b");
  std::ostringstream log;
  const auto r1 = run_pipeline(mock_config(d1), "report", &log);
  const auto r2 = run_pipeline(mock_config(d2));
  EXPECT_EQ(r1.ran, stage_names());
  EXPECT_GT(r1.engine_calls, 0u);
  EXPECT_NE(log.str().find("report: done"), std::string::npos);

  for (const char* f : {"report.md", "report.json", "manifest.json", "geo_eval.json", "metrics.json",
                        "dataset.csv", "split.jsonl"}) {
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  }
  EXPECT_EQ(r1.manifest.digest(), r2.manifest.digest());

  const auto report = slurp(d1 / "report.md");
  const auto manifest = slurp(d1 / "manifest.json");
  const auto rerun = run_pipeline(mock_config(d1));
  EXPECT_TRUE(rerun.ran.empty());
  EXPECT_EQ(rerun.skipped, stage_names());
  EXPECT_EQ(slurp(d1 / "report.md"), report);
  EXPECT_EQ(slurp(d1 / "manifest.json"), manifest);

  const auto eval = slurp(d1 / "geo_eval.json");
  fs::remove(d1 / "geo_eval.json");
  const auto partial = run_pipeline(mock_config(d1));
  EXPECT_EQ(partial.ran, (std::vector<std::string>{"geo-eval"}));
  EXPECT_EQ(slurp(d1 / "geo_eval.json"), eval);
  EXPECT_EQ(slurp(d1 / "report.md"), report);
  EXPECT_EQ(slurp(d1 / "manifest.json"), manifest);

  const auto until = run_pipeline(mock_config(test_util::temp_dir("pipe-c")), "split");
  EXPECT_EQ(until.ran, (std::vector<std::string>{"ingest", "clean", "split"}));
  EXPECT_THROW(run_pipeline(mock_config(d1), "nope"), config_error);

  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Pipeline, StageFailureNamesTheStage) {
  const auto d = test_util::temp_dir("pipe-fail");
  const auto corpus = test_util::temp_dir("pipe-fail-corpus");
  fs::copy(fs::path(GEO_FIXTURE_DIR) / "corpus", corpus, fs::copy_options::recursive);
  write_file(corpus / "results" / "q03.json", "{ not json");
  try {
    run_pipeline(mock_config(d, {{"corpus.fixtures", corpus.string()}}));
    FAIL() << "expected a stage failure";
  } catch (const stage_error& e) {
    EXPECT_EQ(e.stage(), "ingest");
    EXPECT_NE(std::string(e.what()).find("ingest"), std::string::npos);
  }
  fs::remove_all(d);
  fs::remove_all(corpus);
}

TEST(Pipeline, MissingPromptTemplateIsAConfigError) {
  const auto d = test_util::temp_dir("pipe-prompts");
  const auto empty = test_util::temp_dir("pipe-prompts-empty");
  EXPECT_THROW(run_pipeline(mock_config(d, {{"prompts.dir", empty.string()}})), config_error);
  EXPECT_TRUE(fs::exists(d / "split.jsonl"));
  fs::remove_all(d);
  fs::remove_all(empty);
}
