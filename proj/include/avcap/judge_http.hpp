#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "avcap/errors.hpp"
#include "avcap/judge_types.hpp"

namespace avcap::judge {

namespace detail {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("judge base_url must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
    out.path = "/v1/chat/completions";
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return out;
}

}  // namespace detail

/// Chat-completion style HTTP judge. Sends the rendered prompt as a single
/// user message and returns the first choice's message content. Transport
/// problems (connection failures, non-200 statuses, malformed bodies) throw
/// TransportError so the client layer can retry them.
class HttpTransport : public JudgeTransport {
 public:
  explicit HttpTransport(JudgeEndpointConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw ConfigError("HttpTransport: base_url is required");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (cfg_.base_url.rfind("https://", 0) == 0) {
      throw ConfigError("HttpTransport: built without TLS support, use http:// or rebuild with OpenSSL");
    }
#endif
  }

  std::string send(const JudgeRequest& req) override {
    const auto url = detail::parse_url(cfg_.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(cfg_.timeout_s));

    httplib::Headers headers;
    if (!cfg_.api_key_env_var.empty()) {
      if (const char* key = std::getenv(cfg_.api_key_env_var.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
      }
    }

    const nlohmann::json body{
        {"model", cfg_.model_name},
        {"temperature", cfg_.request_temperature},
        {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"}, {"content", req.prompt}}})},
    };

    const auto res = client.Post(url.path, headers, body.dump(), "application/json");
    if (!res) {
      throw TransportError("http judge: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw TransportError("http judge: status " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      const auto doc = nlohmann::json::parse(res->body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("http judge: malformed response body: ") + e.what());
    }
  }

 private:
  JudgeEndpointConfig cfg_;
};

}  // namespace avcap::judge
