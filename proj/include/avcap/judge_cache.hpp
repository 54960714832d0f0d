#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "avcap/errors.hpp"
#include "avcap/hash.hpp"
#include "avcap/judge_types.hpp"

namespace avcap::judge {

/// Content-addressed response cache: one JSON file per request hash holding
/// the request digest, the raw response, and (once known) the parsed value.
/// Writes go through a temp file + rename so concurrent readers never see a
/// partial entry.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  static std::string request_key(const JudgeRequest& req, std::string_view model_name) {
    return digest({to_string(req.protocol), model_name, req.prompt, req.key});
  }

  struct Entry {
    std::string request_digest;
    std::string raw_response;
    nlohmann::json parsed;  // null until the caller stores it
  };

  std::optional<Entry> load(const std::string& key) const {
    const auto path = entry_path(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;  // damaged entry: treat as a miss
    }
    if (!doc.is_object() || !doc.contains("request_digest") || !doc.contains("raw_response")) {
      return std::nullopt;
    }
    Entry e;
    e.request_digest = doc["request_digest"].get<std::string>();
    e.raw_response = doc["raw_response"].get<std::string>();
    e.parsed = doc.value("parsed", nlohmann::json());
    return e;
  }

  void store(const std::string& key, const JudgeRequest& req, std::string_view model_name,
             const std::string& raw_response, const nlohmann::json& parsed = {}) const {
    nlohmann::json doc{
        {"request_digest", request_key(req, model_name)},
        {"protocol", std::string(to_string(req.protocol))},
        {"model", std::string(model_name)},
        {"raw_response", raw_response},
        {"parsed", parsed},
    };
    static std::atomic<unsigned long long> write_seq{0};
    const auto path = entry_path(key);
    const auto tmp = path.string() + ".tmp." + std::to_string(write_seq.fetch_add(1));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw ConfigError("ResponseCache: cannot write " + tmp);
      out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
  }

  /// Rewrites an existing entry with its parsed value attached.
  void store_parsed(const std::string& key, const JudgeRequest& req, std::string_view model_name,
                    const nlohmann::json& parsed) const {
    if (auto existing = load(key)) {
      store(key, req, model_name, existing->raw_response, parsed);
    }
  }

  std::filesystem::path entry_path(const std::string& key) const { return dir_ / (key + ".json"); }

 private:
  std::filesystem::path dir_;
};

}  // namespace avcap::judge
