#pragma once

// Engine client: request digesting, response cache, per-endpoint pacing and
// retry with exponential backoff over a pluggable transport.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "geo/common/digest.hpp"
#include "geo/common/error.hpp"

namespace geo::genengine {

struct EngineConfig {
  std::string endpoint = "mock://engine";
  std::string model_name = "mock";
  double temperature = 0.9;
  int max_attempts = 3;
  std::chrono::milliseconds pacing_interval{0};
  std::chrono::milliseconds backoff_base{200};
  std::uint64_t seed = 0;
  std::string api_key_env = "GEO_ENGINE_API_KEY";

  void validate() const {
    if (temperature < 0) throw config_error("temperature must be >= 0");
    if (pacing_interval.count() < 0) throw config_error("pacing_interval must be >= 0");
    if (max_attempts < 1) throw config_error("max_attempts must be >= 1");
  }
};

struct EngineRequest {
  std::string model;
  std::string prompt;  // single user message
  double temperature = 0.0;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
    j["temperature"] = temperature;
    j["seed"] = seed;
    return j;
  }

  std::string digest() const { return sha256_hex(to_json().dump()); }
};

struct TransportResponse {
  enum class Status { ok, rate_limited, failed } status = Status::ok;
  std::string text;
  std::string diagnostic;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResponse send(const EngineRequest& request) = 0;
};

/// Enforces a minimum gap between consecutive dispatches to one endpoint.
class Pacer {
 public:
  using Clock = std::chrono::steady_clock;

  void wait(std::chrono::milliseconds interval) {
    std::lock_guard lock(mutex_);
    if (last_ && interval.count() > 0) {
      const auto ready = *last_ + interval;
      if (Clock::now() < ready) std::this_thread::sleep_until(ready);
    }
    last_ = Clock::now();
  }

  /// Shared pacer per endpoint, so independent clients still respect the gap.
  static std::shared_ptr<Pacer> for_endpoint(const std::string& endpoint) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::shared_ptr<Pacer>> registry;
    std::lock_guard lock(registry_mutex);
    auto& p = registry[endpoint];
    if (!p) p = std::make_shared<Pacer>();
    return p;
  }

 private:
  std::mutex mutex_;
  std::optional<Clock::time_point> last_;
};

struct Telemetry {
  std::atomic<std::uint64_t> transport_calls{0};
  std::atomic<std::uint64_t> cache_hits{0};
  std::atomic<std::uint64_t> retries{0};
};

/// Cache layout: <dir>/<request digest>.json holding
/// {"request": <request object>, "response": "<text>"}.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt) : dir_(std::move(dir)) {}

  std::optional<std::string> get(const EngineRequest& req) {
    const auto key = req.digest();
    std::lock_guard lock(mutex_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
    if (dir_) {
      const auto path = *dir_ / (key + ".json");
      if (std::filesystem::exists(path)) {
        auto j = nlohmann::json::parse(read_file(path));
        auto text = j.at("response").get<std::string>();
        memory_[key] = text;
        return text;
      }
    }
    return std::nullopt;
  }

  void put(const EngineRequest& req, const std::string& response) {
    const auto key = req.digest();
    std::lock_guard lock(mutex_);
    memory_[key] = response;
    if (dir_) {
      nlohmann::ordered_json j;
      j["request"] = req.to_json();
      j["response"] = response;
      write_file(*dir_ / (key + ".json"), j.dump(2) + "\n");
    }
  }

 private:
  std::optional<std::filesystem::path> dir_;
  std::mutex mutex_;
  std::map<std::string, std::string> memory_;
};

class EngineClient {
 public:
  EngineClient(EngineConfig cfg, std::shared_ptr<Transport> transport,
               std::optional<std::filesystem::path> cache_dir = std::nullopt)
      : cfg_(std::move(cfg)),
        transport_(std::move(transport)),
        cache_(std::move(cache_dir)),
        pacer_(Pacer::for_endpoint(cfg_.endpoint)) {
    cfg_.validate();
  }

  const EngineConfig& config() const { return cfg_; }
  const Telemetry& telemetry() const { return telemetry_; }

  EngineRequest make_request(std::string prompt) const {
    return {cfg_.model_name, std::move(prompt), cfg_.temperature, cfg_.seed};
  }

  std::string complete(const std::string& prompt) { return send(make_request(prompt)); }

  /// Cached, paced dispatch. Retries rate limits and transport failures up to
  /// max_attempts with exponential backoff, then throws engine_error.
  std::string send(const EngineRequest& req) {
    if (auto hit = cache_.get(req)) {
      ++telemetry_.cache_hits;
      return *hit;
    }
    std::string last_diagnostic = "no attempt made";
    for (int attempt = 0; attempt < cfg_.max_attempts; ++attempt) {
      if (attempt > 0) {
        ++telemetry_.retries;
        std::this_thread::sleep_for(cfg_.backoff_base * (1LL << std::min(attempt - 1, 16)));
      }
      pacer_->wait(cfg_.pacing_interval);
      ++telemetry_.transport_calls;
      auto resp = transport_->send(req);
      if (resp.status == TransportResponse::Status::ok) {
        cache_.put(req, resp.text);
        return resp.text;
      }
      last_diagnostic = (resp.status == TransportResponse::Status::rate_limited ? "rate limited: " : "failed: ") +
                        resp.diagnostic;
    }
    throw engine_error("engine request failed after " + std::to_string(cfg_.max_attempts) +
                       " attempts: " + last_diagnostic);
  }

 private:
  EngineConfig cfg_;
  std::shared_ptr<Transport> transport_;
  ResponseCache cache_;
  std::shared_ptr<Pacer> pacer_;
  Telemetry telemetry_;
};

}  // namespace geo::genengine
