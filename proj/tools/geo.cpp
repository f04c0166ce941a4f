// geo: command-line front end for the pipeline stages.
//
// Every stage subcommand works in one of two modes:
//   --config <file>   run the configured pipeline up to and including the stage
//   file flags        run that stage alone on the given files
// Exit codes: 0 success, 1 configuration error, 2 stage failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geo/common/digest.hpp"
#include "geo/common/error.hpp"
#include "geo/corpus/dataset.hpp"
#include "geo/corpus/ingest.hpp"
#include "geo/genengine/client.hpp"
#include "geo/genengine/http_transport.hpp"
#include "geo/genengine/mock_engine.hpp"
#include "geo/harness/config.hpp"
#include "geo/harness/pipeline.hpp"
#include "geo/harness/stages.hpp"
#include "geo/seqcore/noise.hpp"
#include "geo/textmetrics/metrics.hpp"
#include "geo/trainkit/split.hpp"

namespace {

using namespace geo;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string engine;
  std::string output_dir;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Run configuration file (key = value)");
  sub->add_option("--seed", c.seed, "Seed for every seeded step of this command");
  sub->add_option("--engine", c.engine, "Engine: live or mock")->check(CLI::IsMember({"live", "mock"}));
  sub->add_option("--output-dir", c.output_dir, "Override output.dir of the run configuration");
}

harness::RunConfig pipeline_config(const Common& c) {
  harness::KeyValues overrides;
  if (c.seed) {
    for (const char* k : {"split.seed", "engine.seed", "geo_eval.seed"}) overrides[k] = std::to_string(*c.seed);
  }
  if (!c.engine.empty()) overrides["engine.mode"] = c.engine;
  if (!c.output_dir.empty()) overrides["output.dir"] = std::filesystem::absolute(c.output_dir).string();
  return harness::load_run_config(c.config, overrides);
}

int run_pipeline_until(const Common& c, const std::string& stage) {
  auto cfg = pipeline_config(c);
  auto result = harness::run_pipeline(cfg, stage, &std::cerr);
  std::cout << "manifest " << (cfg.output_dir / "manifest.json").string() << " digest "
            << result.manifest.digest() << "\n";
  return 0;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw config_error(what);
}

std::set<std::string> parse_list(const std::string& csv) {
  std::set<std::string> out;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = text::trim(item);
    if (!t.empty()) out.insert(text::ascii_lower(t));
  }
  return out;
}

genengine::EngineClient make_client(const std::string& engine, std::uint64_t seed, const std::string& endpoint,
                                    const std::string& model, const std::string& cache) {
  genengine::EngineConfig ec;
  ec.seed = seed;
  std::shared_ptr<genengine::Transport> transport;
  if (engine == "live") {
    require(!endpoint.empty() && !model.empty(), "live engine needs --endpoint and --model");
    ec.endpoint = endpoint;
    ec.model_name = model;
    transport = std::make_shared<genengine::HttpTransport>(ec);
  } else {
    transport = std::make_shared<genengine::MockEngine>();
  }
  std::optional<std::filesystem::path> cache_dir;
  if (!cache.empty()) cache_dir = cache;
  return genengine::EngineClient(ec, transport, cache_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative engine optimisation toolkit"};
  app.require_subcommand(1);

  // ingest
  Common ingest_c;
  std::string fixtures, ingest_out, excluded;
  std::size_t min_chars = corpus::kMinChars, max_chars = corpus::kMaxChars, docs_per_query = 5;
  auto* ingest = app.add_subcommand("ingest", "Fetch recorded search results and gate documents");
  add_common(ingest, ingest_c);
  ingest->add_option("--fixtures", fixtures, "Fixture corpus directory");
  ingest->add_option("--out", ingest_out, "Output documents (JSON Lines)");
  ingest->add_option("--excluded-domains", excluded, "Comma-separated hosts to exclude");
  ingest->add_option("--min-chars", min_chars, "Minimum extracted characters");
  ingest->add_option("--docs-per-query", docs_per_query, "Usable documents to collect per query");

  // clean
  Common clean_c;
  std::string clean_in, clean_out, review;
  auto* clean = app.add_subcommand("clean", "Trim usable documents into dataset rows");
  add_common(clean, clean_c);
  clean->add_option("--in", clean_in, "Documents (JSON Lines)");
  clean->add_option("--out", clean_out, "Dataset CSV");
  clean->add_option("--max-chars", max_chars, "Trim limit in characters");
  clean->add_option("--min-chars", min_chars, "Minimum characters");
  clean->add_option("--review-exclusions", review, "File with URLs to drop, one per line");

  // split
  Common split_c;
  std::string split_in, split_out;
  trainkit::SplitConfig split_cfg;
  auto* split = app.add_subcommand("split", "Length-stratified train/validation/test split");
  add_common(split, split_c);
  split->add_option("--in", split_in, "Dataset CSV");
  split->add_option("--out", split_out, "Split manifest (default: stdout)");
  split->add_option("--bins", split_cfg.bins, "Number of length bins");
  split->add_option("--train", split_cfg.train_fraction, "Train fraction within each bin");
  split->add_option("--test-queries", split_cfg.test_queries, "Queries held out for test");

  // label
  Common label_c;
  std::string label_in, label_out, traces_out, prompts_dir = GEO_DEFAULT_PROMPT_DIR, endpoint, model, cache;
  std::size_t workers = 1;
  auto* label = app.add_subcommand("label", "Produce optimised texts with the engine");
  add_common(label, label_c);
  label->add_option("--in", label_in, "Dataset CSV");
  label->add_option("--out", label_out, "Labelled dataset CSV");
  label->add_option("--traces", traces_out, "Per-row optimisation traces (JSON Lines)");
  label->add_option("--prompts", prompts_dir, "Prompt template directory");
  label->add_option("--endpoint", endpoint, "Live engine endpoint URL");
  label->add_option("--model", model, "Live engine model name");
  label->add_option("--cache", cache, "Response cache directory");
  label->add_option("--workers", workers, "Concurrent rows");

  // metrics
  Common metrics_c;
  std::string candidate, reference, format = "table";
  auto* metrics = app.add_subcommand("metrics", "ROUGE-L, BLEU and length ratio per line pair");
  add_common(metrics, metrics_c);
  metrics->add_option("--candidate", candidate, "Candidate texts, one per line");
  metrics->add_option("--reference", reference, "Reference texts, one per line");
  metrics->add_option("--format", format, "table or lines")->check(CLI::IsMember({"table", "lines"}));

  // noise
  Common noise_c;
  std::string noise_kind = "infill", noise_in;
  double noise_rate = 0.15, span_mean = 3.0;
  auto* noise = app.add_subcommand("noise", "Corrupt text with a noising function (one document per line)");
  add_common(noise, noise_c);
  noise->add_option("--kind", noise_kind, "mask, delete, infill, permute or rotate");
  noise->add_option("--rate", noise_rate, "Corruption rate");
  noise->add_option("--span-mean", span_mean, "Mean infill span length");
  noise->add_option("--in", noise_in, "Input file (default: stdin)");

  // geo-eval
  Common geo_c;
  std::string dataset, geo_split, queries_file, geo_out, policy = "mad3.5";
  std::size_t n_queries = 50;
  auto* geo = app.add_subcommand("geo-eval", "Visibility of one optimised source per query");
  add_common(geo, geo_c);
  geo->add_option("--dataset", dataset, "Labelled dataset CSV");
  geo->add_option("--split", geo_split, "Split manifest; restricts evaluation to test queries");
  geo->add_option("--query-records", queries_file, "QueryRecord JSON Lines (query texts)");
  geo->add_option("--queries", n_queries, "Number of queries to evaluate");
  geo->add_option("--outlier-policy", policy, "mad<threshold> or none");
  geo->add_option("--prompts", prompts_dir, "Prompt template directory");
  geo->add_option("--endpoint", endpoint, "Live engine endpoint URL");
  geo->add_option("--model", model, "Live engine model name");
  geo->add_option("--cache", cache, "Response cache directory");
  geo->add_option("--out", geo_out, "Result JSON (default: stdout)");

  // report
  Common report_c;
  auto* report = app.add_subcommand("report", "Run the configured pipeline and emit the report");
  add_common(report, report_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*ingest) {
      if (!ingest_c.config.empty()) return run_pipeline_until(ingest_c, "ingest");
      require(!fixtures.empty() && !ingest_out.empty(), "ingest needs --fixtures and --out (or --config)");
      corpus::IngestConfig ic;
      ic.min_chars = min_chars;
      ic.docs_per_query = docs_per_query;
      ic.excluded_domains = parse_list(excluded);
      auto docs = corpus::ingest_fixtures(fixtures, ic);
      corpus::store_documents(docs, ingest_out);
      std::map<std::string, std::size_t> by_status;
      for (const auto& d : docs) ++by_status[std::string(corpus::to_string(d.status))];
      for (const auto& [s, n] : by_status) std::cout << s << " " << n << "\n";
      return 0;
    }
    if (*clean) {
      if (!clean_c.config.empty()) return run_pipeline_until(clean_c, "clean");
      require(!clean_in.empty() && !clean_out.empty(), "clean needs --in and --out (or --config)");
      std::set<std::string> review_urls;
      if (!review.empty()) {
        for (auto u : text::split_whitespace(read_file(review))) review_urls.emplace(u);
      }
      auto rows = corpus::clean_documents(corpus::load_documents(clean_in), max_chars, min_chars, review_urls);
      corpus::store_dataset(rows, clean_out);
      std::cout << "rows " << rows.size() << "\n";
      return 0;
    }
    if (*split) {
      if (!split_c.config.empty()) return run_pipeline_until(split_c, "split");
      require(!split_in.empty(), "split needs --in (or --config)");
      split_cfg.seed = split_c.seed.value_or(0);
      auto assignment = trainkit::make_split(harness::split_items(corpus::load_dataset(split_in)), split_cfg);
      const auto doc = trainkit::format_split_manifest(assignment);
      if (split_out.empty()) {
        std::cout << doc;
      } else {
        write_file(split_out, doc);
      }
      return 0;
    }
    if (*label) {
      if (!label_c.config.empty()) return run_pipeline_until(label_c, "label");
      require(!label_in.empty() && !label_out.empty(), "label needs --in and --out (or --config)");
      auto client = make_client(label_c.engine.empty() ? "mock" : label_c.engine, label_c.seed.value_or(0), endpoint,
                                model, cache);
      auto prompts = genengine::PromptSet::load(prompts_dir);
      auto outcome = harness::label_pairs(corpus::load_dataset(label_in), client, prompts, workers);
      corpus::store_dataset(outcome.labelled, label_out);
      if (!traces_out.empty()) write_file(traces_out, harness::format_traces(outcome));
      std::cout << "labelled " << outcome.labelled.size() << " invalid " << outcome.invalid << "\n";
      return 0;
    }
    if (*metrics) {
      if (!metrics_c.config.empty()) return run_pipeline_until(metrics_c, "metrics");
      require(!candidate.empty() && !reference.empty(), "metrics needs --candidate and --reference (or --config)");
      const auto cands = read_lines(candidate), refs = read_lines(reference);
      require(cands.size() == refs.size(), "candidate and reference files differ in line count");
      double r = 0, b = 0, l = 0;
      char buf[128];
      if (format == "lines") std::cout << "rouge_l\tbleu\tlength_ratio\n";
      for (std::size_t i = 0; i < cands.size(); ++i) {
        auto m = textmetrics::evaluate(cands[i], refs[i]);
        r += m.rouge_l;
        b += m.bleu;
        l += m.length_ratio;
        if (format == "lines") {
          std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%.6f\n", m.rouge_l, m.bleu, m.length_ratio);
          std::cout << buf;
        }
      }
      if (format == "table") {
        const double n = cands.empty() ? 1.0 : static_cast<double>(cands.size());
        std::cout << "| n | rouge_l | bleu | length_ratio |\n|---|---|---|---|\n";
        std::snprintf(buf, sizeof buf, "| %zu | %.4f | %.4f | %.4f |\n", cands.size(), r / n, b / n, l / n);
        std::cout << buf;
      }
      return 0;
    }
    if (*noise) {
      auto spec = seqcore::NoiseSpec{seqcore::parse_noise_kind(noise_kind), noise_rate, span_mean,
                                     noise_c.seed.value_or(0)};
      spec.validate();
      std::istringstream in(noise_in.empty() ? std::string(std::istreambuf_iterator<char>(std::cin), {})
                                             : read_file(noise_in));
      std::string line;
      std::uint64_t doc = 0;
      while (std::getline(in, line)) {
        std::vector<std::string> tokens;
        for (auto t : text::split_whitespace(line)) tokens.emplace_back(t);
        auto per_doc = spec;
        per_doc.seed = spec.seed + doc++;
        std::cout << text::join(seqcore::apply_noise(tokens, per_doc), " ") << "\n";
      }
      return 0;
    }
    if (*geo) {
      if (!geo_c.config.empty()) return run_pipeline_until(geo_c, "geo-eval");
      require(!dataset.empty(), "geo-eval needs --dataset (or --config)");
      auto pairs = corpus::load_dataset(dataset);
      std::map<std::string, corpus::QueryRecord> records;
      if (!queries_file.empty()) {
        for (auto& q : corpus::parse_jsonl<corpus::QueryRecord>(read_file(queries_file))) records[q.id] = q;
      }
      std::optional<std::set<std::string>> allowed;
      if (!geo_split.empty()) {
        allowed.emplace();
        auto s = trainkit::parse_split_manifest(read_file(geo_split));
        for (const auto& p : pairs) {
          auto it = s.membership.find(harness::item_id(p));
          if (it != s.membership.end() && it->second == trainkit::Membership::test) allowed->insert(p.query_id);
        }
      }
      const auto seed = geo_c.seed.value_or(0);
      auto client = make_client(geo_c.engine.empty() ? "mock" : geo_c.engine, seed, endpoint, model, cache);
      auto prompts = genengine::PromptSet::load(prompts_dir);
      harness::GeoEvalConfig gc{n_queries, seed, visibility::OutlierPolicy::parse(policy), 1};
      auto outcome = harness::geo_eval(pairs, records, client, prompts, gc, allowed ? &*allowed : nullptr);
      const auto doc = harness::to_json(outcome).dump(2) + "\n";
      if (geo_out.empty()) {
        std::cout << doc;
      } else {
        write_file(geo_out, doc);
      }
      for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }
    if (*report) {
      require(!report_c.config.empty(), "report needs --config");
      auto cfg = pipeline_config(report_c);
      auto result = harness::run_pipeline(cfg, "report", &std::cerr);
      std::cout << "report " << (cfg.output_dir / "report.md").string() << "\n"
                << "manifest digest " << result.manifest.digest() << "\n";
      return 0;
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const stage_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
