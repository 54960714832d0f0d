#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "avcap/errors.hpp"

namespace avcap::judge {

/// The judge protocols this gateway speaks. The last two are caption
/// generation prompts shipped for completeness; they have no gateway
/// operation because captioning real media is out of scope here.
enum class Protocol {
  fuse_captions,
  decompose_keypoints,
  judge_keypoints,
  extract_dialogues,
  speaker_consistency,
  answer_mcq,
  score_completeness,
  video_frame_caption,
  audio_caption,
};

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::fuse_captions: return "fuse_captions";
    case Protocol::decompose_keypoints: return "decompose_keypoints";
    case Protocol::judge_keypoints: return "judge_keypoints";
    case Protocol::extract_dialogues: return "extract_dialogues";
    case Protocol::speaker_consistency: return "speaker_consistency";
    case Protocol::answer_mcq: return "answer_mcq";
    case Protocol::score_completeness: return "score_completeness";
    case Protocol::video_frame_caption: return "video_frame_caption";
    case Protocol::audio_caption: return "audio_caption";
  }
  return "unknown";
}

/// One judge invocation. `prompt` is the fully rendered template (what an
/// HTTP judge sees); `payload` carries the structured inputs so the mock
/// judge can resolve its rule table without parsing prose; `key` is a stable
/// identifier (item id, sample id, video ref) when the caller has one.
struct JudgeRequest {
  Protocol protocol = Protocol::answer_mcq;
  std::string prompt;
  std::string key;
  nlohmann::json payload;
};

struct JudgeEndpointConfig {
  std::string base_url;  // e.g. http://localhost:8800/v1/chat/completions
  std::string model_name = "mock";
  double timeout_s = 30.0;
  int max_retries = 2;
  std::optional<std::filesystem::path> cache_dir;
  std::string api_key_env_var = "JUDGE_API_KEY";
  int max_in_flight = 4;        // bound on concurrent transport calls
  int backoff_initial_ms = 100; // doubles per retry
  double request_temperature = 0.0;
};

inline void validate(const JudgeEndpointConfig& cfg) {
  if (cfg.max_retries < 0) throw ConfigError("JudgeEndpointConfig: max_retries must be >= 0");
  if (!(cfg.timeout_s > 0.0)) throw ConfigError("JudgeEndpointConfig: timeout must be positive");
  if (cfg.max_in_flight < 1) throw ConfigError("JudgeEndpointConfig: max_in_flight must be >= 1");
}

/// Transport abstraction: returns the judge's raw text response.
/// Implementations throw TransportError for retryable failures.
class JudgeTransport {
 public:
  virtual ~JudgeTransport() = default;
  virtual std::string send(const JudgeRequest& request) = 0;
};

}  // namespace avcap::judge
