#pragma once

// Chat-completion transport over HTTP(S). Request body:
//   {"model": ..., "messages": [{"role": "user", "content": ...}], "temperature": ...}
// The response text is choices[0].message.content. HTTP 429 is reported as a
// rate limit; other non-200 statuses and connection errors as failures.
//
// Including this header requires linking OpenSSL (ssl + crypto).

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <string>

#include "geo/common/error.hpp"
#include "geo/genengine/client.hpp"

namespace geo::genengine {

struct EndpointParts {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline EndpointParts split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw config_error("endpoint '" + endpoint + "' has no scheme");
  const auto scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw config_error("endpoint scheme must be http or https");
  const auto slash = endpoint.find('/', scheme_end + 3);
  if (slash == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

class HttpTransport : public Transport {
 public:
  HttpTransport(const EngineConfig& cfg, int timeout_seconds = 120)
      : parts_(split_endpoint(cfg.endpoint)), timeout_seconds_(timeout_seconds) {
    if (const char* key = std::getenv(cfg.api_key_env.c_str())) api_key_ = key;
  }

  TransportResponse send(const EngineRequest& req) override {
    httplib::Client client(parts_.origin);
    client.set_connection_timeout(timeout_seconds_);
    client.set_read_timeout(timeout_seconds_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    nlohmann::ordered_json body;
    body["model"] = req.model;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", req.prompt}}});
    body["temperature"] = req.temperature;

    auto res = client.Post(parts_.path, headers, body.dump(), "application/json");
    if (!res) return {TransportResponse::Status::failed, {}, "transport: " + httplib::to_string(res.error())};
    if (res->status == 429) return {TransportResponse::Status::rate_limited, {}, "HTTP 429"};
    if (res->status != 200) {
      return {TransportResponse::Status::failed, {}, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200)};
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      return {TransportResponse::Status::ok, j.at("choices").at(0).at("message").at("content").get<std::string>(), {}};
    } catch (const std::exception& e) {
      return {TransportResponse::Status::failed, {}, std::string("malformed response: ") + e.what()};
    }
  }

 private:
  EndpointParts parts_;
  int timeout_seconds_;
  std::string api_key_;
};

}  // namespace geo::genengine
