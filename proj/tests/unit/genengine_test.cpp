#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "geo/genengine/client.hpp"
#include "geo/genengine/http_transport.hpp"
#include "geo/genengine/mock_engine.hpp"
#include "geo/genengine/prompts.hpp"
#include "geo/genengine/tasks.hpp"
#include "test_util.hpp"

using namespace geo;
using namespace geo::genengine;
using Status = TransportResponse::Status;

namespace {

/// Transport driven by a callback; records dispatch times.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::function<TransportResponse(const EngineRequest&, int)> fn) : fn_(std::move(fn)) {}
  TransportResponse send(const EngineRequest& req) override {
    std::lock_guard lock(mutex_);
    times.push_back(std::chrono::steady_clock::now());
    return fn_(req, calls++);
  }
  int calls = 0;
  std::vector<std::chrono::steady_clock::time_point> times;

 private:
  std::function<TransportResponse(const EngineRequest&, int)> fn_;
  std::mutex mutex_;
};

int endpoint_counter = 0;

EngineConfig fast_config(std::uint64_t seed = 7) {
  EngineConfig cfg;
  cfg.endpoint = "test://endpoint-" + std::to_string(++endpoint_counter);
  cfg.backoff_base = std::chrono::milliseconds(1);
  cfg.seed = seed;
  return cfg;
}

EngineClient mock_client(std::uint64_t seed = 7) { return EngineClient(fast_config(seed), std::make_shared<MockEngine>()); }

corpus::ContentPair pair(std::string text, std::optional<std::string> opt = std::nullopt) {
  return {"q", "https://x.example/" + std::to_string(text.size()), std::move(text), std::move(opt)};
}

}  // namespace

// ---- prompts ----------------------------------------------------------------

TEST(Prompts, BundledTemplatesLoadAndRender) {
  const auto prompts = PromptSet::load();
  const auto p = prompts.render("citations", {{"text", wrap_text("hello")}});
  EXPECT_EQ(mock::header_value(p, "TASK"), "citations");
  EXPECT_NE(p.find("<<<TEXT\nhello\nTEXT>>>"), std::string::npos);
  EXPECT_NE(p.find("descriptive headings"), std::string::npos);
  EXPECT_THROW(prompts.render("citations", {}), config_error);
  EXPECT_THROW(PromptSet::load("/nonexistent/prompts"), config_error);
}

// ---- query generation -------------------------------------------------------

TEST(GenerateQueries, MockGivesDistinctDeterministicQueries) {
  const auto prompts = PromptSet::load();
  auto c1 = mock_client();
  auto c2 = mock_client();
  const auto a = generate_queries("budget travel", 5, c1, prompts, "bt");
  const auto b = generate_queries("budget travel", 5, c2, prompts, "bt");
  ASSERT_EQ(a.queries.size(), 5u);
  EXPECT_TRUE(a.warnings.empty());
  std::set<std::string> texts;
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a.queries[i].text, b.queries[i].text);
    EXPECT_EQ(a.queries[i].subcategory, "budget travel");
    texts.insert(a.queries[i].text);
  }
  EXPECT_EQ(texts.size(), 5u);
  EXPECT_EQ(a.queries[0].id, "bt-01");
}

TEST(GenerateQueries, DuplicatesRemovedWithWarning) {
  auto t = std::make_shared<ScriptedTransport>([](const EngineRequest&, int) {
    return TransportResponse{Status::ok, "1. Where to go?\n2. where  TO go?\n\n3. What to eat?\n", {}};
  });
  EngineClient client(fast_config(), t);
  const auto batch = generate_queries("food", 4, client, PromptSet::load());
  ASSERT_EQ(batch.queries.size(), 2u);
  EXPECT_EQ(batch.queries[1].text, "What to eat?");
  EXPECT_EQ(batch.warnings.size(), 2u);
}

TEST(GenerateQueries, AlwaysFailingEngineErrors) {
  auto t = std::make_shared<ScriptedTransport>(
      [](const EngineRequest&, int) { return TransportResponse{Status::failed, {}, "boom"}; });
  EngineClient client(fast_config(), t);
  try {
    generate_queries("x", 3, client, PromptSet::load());
    FAIL();
  } catch (const engine_error& e) {
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
  EXPECT_EQ(t->calls, 3);
}

// ---- content optimisation ---------------------------------------------------

TEST(OptimizeContent, MockGolden) {
  const std::string w = "Porto is   compact and walkable.  Locals walk in order to relax.\nTrams are cheap.";
  auto client = mock_client(7);
  const auto trace = optimize_content(w, client, PromptSet::load());
  ASSERT_TRUE(trace.valid) << trace.error;
  ASSERT_EQ(trace.phase_outputs.size(), 3u);
  EXPECT_EQ(trace.phase_outputs[0],
            "## Overview\nPorto is   compact and walkable [Journal of Travel Studies, 2019].  Locals walk in order to "
            "relax.\nTrams are cheap.");
  EXPECT_EQ(trace.phase_outputs[1],
            "## Overview\nPorto is compact and walkable [Journal of Travel Studies, 2019]. Locals walk to relax.\nTrams "
            "are cheap.");
  EXPECT_EQ(trace.final_text,
            "## Overview\nPorto is compact and walkable [Journal of Travel Studies, 2019], with 79% of surveyed "
            "travellers rating it highly. Locals walk to relax.\nTrams are cheap.");
}

TEST(OptimizeContent, PhasesChain) {
  std::vector<std::string> payloads;
  auto t = std::make_shared<ScriptedTransport>([&](const EngineRequest& req, int call) {
    payloads.push_back(*mock::delimited(req.prompt, kTextOpen, kTextClose));
    return TransportResponse{Status::ok, "out" + std::to_string(call), {}};
  });
  EngineClient client(fast_config(), t);
  const auto trace = optimize_content("input", client, PromptSet::load());
  ASSERT_TRUE(trace.valid);
  EXPECT_EQ(payloads, (std::vector<std::string>{"input", "out0", "out1"}));
  EXPECT_EQ(trace.final_text, "out2");
}

TEST(OptimizeContent, EmptyInputRejected) {
  auto client = mock_client();
  EXPECT_THROW(optimize_content("  ", client, PromptSet::load()), precondition_error);
}

TEST(OptimizeContent, SecondPhaseFailureInvalidates) {
  auto t = std::make_shared<ScriptedTransport>([](const EngineRequest& req, int) {
    if (mock::header_value(req.prompt, "TASK") == "fluency") return TransportResponse{Status::failed, {}, "down"};
    return MockEngine::respond(req.prompt, req.seed);
  });
  EngineClient client(fast_config(), t);
  const auto trace = optimize_content("Some text here.", client, PromptSet::load());
  EXPECT_FALSE(trace.valid);
  EXPECT_EQ(trace.phase_outputs.size(), 1u);
  EXPECT_NE(trace.error.find("fluency"), std::string::npos);

  auto empty = std::make_shared<ScriptedTransport>([](const EngineRequest&, int) { return TransportResponse{}; });
  EngineClient c2(fast_config(), empty);
  EXPECT_FALSE(optimize_content("x", c2, PromptSet::load()).valid);
}

// ---- answers ----------------------------------------------------------------

TEST(AnswerQuery, MockExtractiveRule) {
  std::vector<corpus::ContentPair> pairs = {
      pair("## Intro\nLisbon is hilly. Trams help."),
      pair("Porto has port wine! It is old."),
      pair("Faro [3] is sunny [2]. Beaches abound."),
      pair("No terminator here"),
      pair("Dr. Smith likes e.g. Braga. More text."),
  };
  auto set = SourceSet::from_pairs({"q", "s", "Where to go?"}, pairs);
  auto client = mock_client();
  const auto answer = answer_query(set, client, PromptSet::load());
  EXPECT_EQ(answer,
            "Lisbon is hilly [1]. Porto has port wine [2]. Faro is sunny [3]. No terminator here [4]. "
            "Dr. Smith likes e.g. Braga [5].");
}

TEST(AnswerQuery, EmptySourcesGiveEmptyAnswer) {
  std::vector<corpus::ContentPair> pairs(5, pair(""));
  auto set = SourceSet::from_pairs({"q", "s", "?"}, pairs);
  auto client = mock_client();
  EXPECT_EQ(answer_query(set, client, PromptSet::load()), "");
}

TEST(AnswerQuery, PromptEnumeratesFiveSources) {
  std::vector<corpus::ContentPair> pairs;
  for (int i = 0; i < 5; ++i) pairs.push_back(pair("Text " + std::to_string(i) + ".", "Opt " + std::to_string(i) + "."));
  auto set = SourceSet::from_pairs({"q", "s", "Q?"}, pairs);
  set.sources[2].optimized = true;
  const auto prompt = answer_prompt(set, PromptSet::load());
  for (int i = 1; i <= 5; ++i) EXPECT_NE(prompt.find("[" + std::to_string(i) + "]\n<<<SOURCE\n"), std::string::npos);
  EXPECT_EQ(prompt.find("[6]"), std::string::npos);
  EXPECT_NE(prompt.find("Opt 2."), std::string::npos);
  EXPECT_EQ(prompt.find("Text 2."), std::string::npos);
  pairs.pop_back();
  EXPECT_THROW(SourceSet::from_pairs({"q", "s", "Q?"}, pairs), precondition_error);
}

TEST(MockEngine, PureFunctionOfPromptAndSeed) {
  const auto p = PromptSet::load().render("statistics", {{"text", wrap_text("Kyoto has temples. Many.")}});
  EXPECT_EQ(MockEngine::respond(p, 1).text, MockEngine::respond(p, 1).text);
  EXPECT_EQ(MockEngine::respond("TASK: nope\n", 1).status, Status::failed);
  EXPECT_EQ(MockEngine::respond("TASK: fluency\n", 1).status, Status::failed);
}

// ---- pacing, retries and cache ----------------------------------------------

TEST(Client, PacingSpacesDispatches) {
  auto t = std::make_shared<ScriptedTransport>([](const EngineRequest&, int) { return TransportResponse{Status::ok, "x", {}}; });
  auto cfg = fast_config();
  cfg.pacing_interval = std::chrono::milliseconds(100);
  EngineClient client(cfg, t);
  client.complete("a");
  client.complete("b");
  ASSERT_EQ(t->times.size(), 2u);
  EXPECT_GE(t->times[1] - t->times[0], std::chrono::milliseconds(100));
}

TEST(Client, PacingIsSharedPerEndpoint) {
  auto t = std::make_shared<ScriptedTransport>([](const EngineRequest&, int) { return TransportResponse{Status::ok, "x", {}}; });
  auto cfg = fast_config();
  cfg.pacing_interval = std::chrono::milliseconds(60);
  EngineClient a(cfg, t), b(cfg, t);
  std::thread t1([&] { a.complete("one"); });
  std::thread t2([&] { b.complete("two"); });
  t1.join();
  t2.join();
  ASSERT_EQ(t->times.size(), 2u);
  const auto gap = t->times[1] > t->times[0] ? t->times[1] - t->times[0] : t->times[0] - t->times[1];
  EXPECT_GE(gap, std::chrono::milliseconds(60));
}

TEST(Client, RateLimitThenSuccessRetriesOnce) {
  auto t = std::make_shared<ScriptedTransport>([](const EngineRequest&, int call) {
    return call == 0 ? TransportResponse{Status::rate_limited, {}, "429"} : TransportResponse{Status::ok, "fine", {}};
  });
  EngineClient client(fast_config(), t);
  EXPECT_EQ(client.complete("p"), "fine");
  EXPECT_EQ(client.telemetry().retries.load(), 1u);
  EXPECT_EQ(t->calls, 2);
}

TEST(Client, PersistentRateLimitExhaustsAttempts) {
  auto t = std::make_shared<ScriptedTransport>(
      [](const EngineRequest&, int) { return TransportResponse{Status::rate_limited, {}, "429"}; });
  auto cfg = fast_config();
  cfg.max_attempts = 4;
  EngineClient client(cfg, t);
  EXPECT_THROW(client.complete("p"), engine_error);
  EXPECT_EQ(t->calls, 4);
}

TEST(Client, BackoffGrowsExponentially) {
  auto t = std::make_shared<ScriptedTransport>(
      [](const EngineRequest&, int) { return TransportResponse{Status::rate_limited, {}, "429"}; });
  auto cfg = fast_config();
  cfg.backoff_base = std::chrono::milliseconds(20);
  EngineClient client(cfg, t);
  EXPECT_THROW(client.complete("p"), engine_error);
  ASSERT_EQ(t->times.size(), 3u);
  EXPECT_GE(t->times[1] - t->times[0], std::chrono::milliseconds(20));
  EXPECT_GE(t->times[2] - t->times[1], std::chrono::milliseconds(40));
}

TEST(Client, RepeatedRequestHitsCache) {
  auto t = std::make_shared<ScriptedTransport>([](const EngineRequest&, int) { return TransportResponse{Status::ok, "r", {}}; });
  EngineClient client(fast_config(), t);
  client.complete("same");
  client.complete("same");
  EXPECT_EQ(client.telemetry().transport_calls.load(), 1u);
  EXPECT_EQ(client.telemetry().cache_hits.load(), 1u);
}

TEST(Client, DiskCacheSurvivesClients) {
  const auto dir = test_util::temp_dir("engine-cache");
  auto t = std::make_shared<ScriptedTransport>([](const EngineRequest&, int) { return TransportResponse{Status::ok, "r", {}}; });
  const auto cfg = fast_config();
  {
    EngineClient client(cfg, t, dir);
    client.complete("persist me");
  }
  EngineClient again(cfg, t, dir);
  EXPECT_EQ(again.complete("persist me"), "r");
  EXPECT_EQ(again.telemetry().cache_hits.load(), 1u);
  EXPECT_EQ(t->calls, 1);
  std::filesystem::remove_all(dir);
}

// ---- HTTP transport ---------------------------------------------------------

TEST(HttpTransport, TalksToLocalServer) {
  httplib::Server server;
  std::string seen_auth;
  std::string seen_body;
  int hits = 0;
  server.Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    if (hits == 1) {
      res.status = 429;
      return;
    }
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"hi there"}}]})", "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("GEO_TEST_HTTP_KEY", "secret", 1);
  auto cfg = fast_config();
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat";
  cfg.model_name = "test-model";
  cfg.api_key_env = "GEO_TEST_HTTP_KEY";
  HttpTransport transport(cfg, 5);
  const auto req = EngineRequest{"test-model", "hello", 0.5, 1};
  const auto first = transport.send(req);
  EXPECT_EQ(first.status, Status::rate_limited);
  const auto second = transport.send(req);
  EXPECT_EQ(second.status, Status::ok);
  EXPECT_EQ(second.text, "hi there");
  EXPECT_EQ(seen_auth, "Bearer secret");
  const auto body = nlohmann::json::parse(seen_body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][0]["content"], "hello");

  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/broken";
  EXPECT_EQ(HttpTransport(cfg, 5).send(req).status, Status::failed);

  // Through the client, a first 429 is retried transparently.
  hits = 0;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat";
  EngineClient client(cfg, std::make_shared<HttpTransport>(cfg, 5));
  EXPECT_EQ(client.complete("again"), "hi there");
  EXPECT_EQ(client.telemetry().retries.load(), 1u);

  server.stop();
  runner.join();
}

TEST(HttpTransport, EndpointParsing) {
  const auto p = split_endpoint("https://api.example.com/v1/chat/completions");
  EXPECT_EQ(p.origin, "https://api.example.com");
  EXPECT_EQ(p.path, "/v1/chat/completions");
  EXPECT_THROW(split_endpoint("api.example.com"), config_error);
  EXPECT_THROW(split_endpoint("ftp://x/y"), config_error);
}
