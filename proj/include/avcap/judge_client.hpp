#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>

#include "avcap/errors.hpp"
#include "avcap/judge_cache.hpp"
#include "avcap/judge_types.hpp"

namespace avcap::judge {

/// Transport wrapper adding the three behaviors every protocol shares:
/// content-addressed caching, exponential-backoff retries, and a bound on
/// concurrent in-flight requests.
class JudgeClient {
 public:
  JudgeClient(JudgeEndpointConfig cfg, std::shared_ptr<JudgeTransport> transport)
      : cfg_(std::move(cfg)),
        transport_(std::move(transport)),
        in_flight_(cfg_.max_in_flight) {
    validate(cfg_);
    if (!transport_) throw ConfigError("JudgeClient: no transport");
    if (cfg_.cache_dir) cache_.emplace(*cfg_.cache_dir);
  }

  struct CallResult {
    std::string raw;
    bool from_cache = false;
    std::string cache_key;
  };

  /// Returns the raw judge response for a request, serving repeats from the
  /// cache. `force_refresh` skips the cache read (the fresh response is still
  /// stored) so callers can re-ask after a response fails validation.
  CallResult cached_call(const JudgeRequest& request, bool force_refresh = false) {
    CallResult result;
    if (cache_) {
      result.cache_key = ResponseCache::request_key(request, cfg_.model_name);
      if (!force_refresh) {
        if (auto entry = cache_->load(result.cache_key);
            entry && entry->request_digest == result.cache_key) {
          result.raw = entry->raw_response;
          result.from_cache = true;
          return result;
        }
      }
    }

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        const auto delay = std::chrono::milliseconds(cfg_.backoff_initial_ms) * (1 << (attempt - 1));
        std::this_thread::sleep_for(delay);
      }
      try {
        in_flight_.acquire();
        struct Release {
          std::counting_semaphore<>& sem;
          ~Release() { sem.release(); }
        } release{in_flight_};
        result.raw = transport_->send(request);
        if (cache_) cache_->store(result.cache_key, request, cfg_.model_name, result.raw);
        return result;
      } catch (const TransportError& e) {
        last_error = e.what();
      }
      // RuleMissingError and other non-transport failures propagate untouched.
    }
    throw JudgeError("judge call failed after " + std::to_string(cfg_.max_retries + 1) +
                     " attempts (" + std::string(to_string(request.protocol)) +
                     "): " + last_error);
  }

  void store_parsed(const CallResult& call, const JudgeRequest& request,
                    const nlohmann::json& parsed) {
    if (cache_ && !call.cache_key.empty()) {
      cache_->store_parsed(call.cache_key, request, cfg_.model_name, parsed);
    }
  }

  const JudgeEndpointConfig& config() const noexcept { return cfg_; }
  const std::optional<ResponseCache>& cache() const noexcept { return cache_; }

 private:
  JudgeEndpointConfig cfg_;
  std::shared_ptr<JudgeTransport> transport_;
  std::optional<ResponseCache> cache_;
  std::counting_semaphore<> in_flight_;
};

}  // namespace avcap::judge
