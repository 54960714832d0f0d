#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "avcap/errors.hpp"
#include "avcap/grpo.hpp"
#include "avcap/judge_types.hpp"
#include "avcap/rewards.hpp"
#include "avcap/text_metrics.hpp"

namespace avcap::cli {

/// Application defaults shared by the CLI subcommands. Precedence order:
/// built-in defaults < config file < command-line flags.
struct AppConfig {
  double gamma = 0.6;
  bool normalize_content = false;  // lowercase + collapse whitespace before similarity

  std::size_t tau1 = 2048;
  std::size_t tau2 = 4096;
  text::TokenizerSpec tokenizer;
  text::RepetitionConfig repetition;

  grpo::GRPOConfig grpo;

  std::size_t min_tokens = 64;
  std::size_t max_tokens = 4096;
  int min_completeness = 4;

  judge::JudgeEndpointConfig endpoint;
  std::filesystem::path prompts_dir = "prompts";
  std::optional<std::filesystem::path> mock_rules;

  int jobs = 1;

  rewards::LengthRewardConfig length_config() const {
    rewards::LengthRewardConfig cfg;
    cfg.tau1 = tau1;
    cfg.tau2 = tau2;
    cfg.tokenizer = tokenizer;
    return cfg;
  }
};

inline text::TokenizerMode tokenizer_mode_from_string(const std::string& s) {
  if (s == "whitespace") return text::TokenizerMode::whitespace;
  if (s == "character") return text::TokenizerMode::character;
  if (s == "external-count-callback") return text::TokenizerMode::external_count_callback;
  throw SchemaError("config: unknown tokenizer mode '" + s + "'");
}

inline void apply_config_json(AppConfig& cfg, const nlohmann::json& j,
                              const std::string& source) {
  if (!j.is_object()) throw SchemaError("config " + source + ": not a JSON object");
  const auto get_double = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = j[key].get<double>();
  };
  const auto get_size = [&](const char* key, std::size_t& slot) {
    if (j.contains(key)) slot = j[key].get<std::size_t>();
  };
  const auto get_int = [&](const char* key, int& slot) {
    if (j.contains(key)) slot = j[key].get<int>();
  };

  get_double("gamma", cfg.gamma);
  if (j.contains("normalize_content")) cfg.normalize_content = j["normalize_content"].get<bool>();
  get_size("tau1", cfg.tau1);
  get_size("tau2", cfg.tau2);
  get_size("min_tokens", cfg.min_tokens);
  get_size("max_tokens", cfg.max_tokens);
  get_int("min_completeness", cfg.min_completeness);
  get_int("jobs", cfg.jobs);

  if (j.contains("tokenizer")) {
    const auto& t = j["tokenizer"];
    if (t.contains("mode")) cfg.tokenizer.mode = tokenizer_mode_from_string(t["mode"].get<std::string>());
    if (t.contains("normalization")) {
      const auto norm = t["normalization"].get<std::string>();
      if (norm == "none") {
        cfg.tokenizer.normalization = text::TextNormalization::none;
      } else if (norm == "lowercase-collapse-whitespace") {
        cfg.tokenizer.normalization = text::TextNormalization::lowercase_collapse_whitespace;
      } else {
        throw SchemaError("config: unknown normalization '" + norm + "'");
      }
    }
  }
  if (j.contains("repetition")) {
    const auto& r = j["repetition"];
    if (r.contains("ngram_len")) cfg.repetition.ngram_len = r["ngram_len"].get<std::size_t>();
    if (r.contains("min_repeats")) cfg.repetition.min_repeats = r["min_repeats"].get<std::size_t>();
  }
  if (j.contains("grpo")) {
    const auto& g = j["grpo"];
    if (g.contains("group_size")) cfg.grpo.group_size = g["group_size"].get<std::size_t>();
    if (g.contains("clip_eps")) cfg.grpo.clip_eps = g["clip_eps"].get<double>();
    if (g.contains("beta")) cfg.grpo.kl_coeff = g["beta"].get<double>();
    if (g.contains("std_eps")) cfg.grpo.std_eps = g["std_eps"].get<double>();
    if (g.contains("temperature")) cfg.grpo.temperature = g["temperature"].get<double>();
    if (g.contains("learning_rate")) cfg.grpo.learning_rate = g["learning_rate"].get<double>();
  }
  if (j.contains("judge")) {
    const auto& e = j["judge"];
    if (e.contains("base_url")) cfg.endpoint.base_url = e["base_url"].get<std::string>();
    if (e.contains("model_name")) cfg.endpoint.model_name = e["model_name"].get<std::string>();
    if (e.contains("timeout_s")) cfg.endpoint.timeout_s = e["timeout_s"].get<double>();
    if (e.contains("max_retries")) cfg.endpoint.max_retries = e["max_retries"].get<int>();
    if (e.contains("cache_dir")) cfg.endpoint.cache_dir = e["cache_dir"].get<std::string>();
    if (e.contains("api_key_env_var")) cfg.endpoint.api_key_env_var = e["api_key_env_var"].get<std::string>();
    if (e.contains("max_in_flight")) cfg.endpoint.max_in_flight = e["max_in_flight"].get<int>();
    if (e.contains("backoff_initial_ms")) cfg.endpoint.backoff_initial_ms = e["backoff_initial_ms"].get<int>();
  }
  if (j.contains("prompts_dir")) cfg.prompts_dir = j["prompts_dir"].get<std::string>();
  if (j.contains("mock_rules")) cfg.mock_rules = j["mock_rules"].get<std::string>();
}

inline AppConfig load_config(const std::filesystem::path& path) {
  AppConfig cfg;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("config: cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("config " + path.string() + ": " + e.what());
  }
  apply_config_json(cfg, doc, path.string());
  return cfg;
}

}  // namespace avcap::cli
