#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avcap/errors.hpp"
#include "avcap/jsonl.hpp"
#include "avcap/judge_gateway.hpp"
#include "avcap/parallel.hpp"
#include "avcap/text_metrics.hpp"

namespace avcap::curation {

struct CurationSample {
  std::string sample_id;
  std::string visual_caption;
  std::string audio_caption;
  std::optional<std::string> fused_caption;
  nlohmann::json raw;
};

struct GateConfig {
  std::size_t min_tokens = 64;
  std::size_t max_tokens = 4096;
  text::TokenizerSpec tokenizer;
  text::RepetitionConfig repetition;
  int min_completeness = 4;  // keep samples scoring at least this
};

inline void validate(const GateConfig& cfg) {
  if (cfg.min_tokens >= cfg.max_tokens) {
    throw ArgumentError("GateConfig: min_tokens must be < max_tokens");
  }
  if (cfg.min_completeness < 1 || cfg.min_completeness > 5) {
    throw ArgumentError("GateConfig: min_completeness must be in [1, 5]");
  }
}

enum class GateStatus { keep, reject, deferred };

inline std::string_view to_string(GateStatus s) {
  switch (s) {
    case GateStatus::keep: return "keep";
    case GateStatus::reject: return "reject";
    case GateStatus::deferred: return "deferred";
  }
  return "unknown";
}

struct GateDecision {
  GateStatus status = GateStatus::reject;
  std::vector<std::string> reasons;  // machine-readable codes for every failed check
  std::optional<int> completeness_score;
  std::optional<std::string> error;  // judge failure; decision deferred
  std::size_t measured_tokens = 0;
  bool collapsed = false;
};

/// Fuses the two modality captions through the judge. The judge's narrative
/// is returned verbatim.
inline std::string fuse_captions(const CurationSample& sample, judge::JudgeGateway& gateway) {
  if (sample.visual_caption.empty() || sample.audio_caption.empty()) {
    throw ArgumentError("fuse_captions: visual and audio captions must be non-empty");
  }
  return gateway.fuse_captions(sample.visual_caption, sample.audio_caption, sample.sample_id);
}

/// Quality gate for a fused caption: token-length window, repetition
/// collapse, and the judge completeness score. Checks are not short-circuited
/// so a rejection lists every failed check; a judge failure defers the
/// decision instead of inventing a completeness verdict.
inline GateDecision gate(const CurationSample& sample, judge::JudgeGateway& gateway,
                         const GateConfig& cfg) {
  validate(cfg);
  if (!sample.fused_caption) throw ArgumentError("gate: sample has no fused caption");
  const std::string& fused = *sample.fused_caption;

  GateDecision decision;
  decision.measured_tokens = text::token_length(fused, cfg.tokenizer);
  if (decision.measured_tokens < cfg.min_tokens) decision.reasons.emplace_back("length_below_min");
  if (decision.measured_tokens > cfg.max_tokens) decision.reasons.emplace_back("length_above_max");

  const auto rep = text::detect_repetition_collapse(fused, cfg.tokenizer, cfg.repetition);
  decision.collapsed = rep.collapsed;
  if (rep.collapsed) decision.reasons.emplace_back("repetition_collapse");

  try {
    const int score = gateway.score_completeness(sample.visual_caption, sample.audio_caption,
                                                 fused, sample.sample_id);
    decision.completeness_score = score;
    if (score < cfg.min_completeness) decision.reasons.emplace_back("completeness_below_min");
  } catch (const Error& e) {
    decision.error = e.what();
    decision.status = GateStatus::deferred;
    return decision;
  }

  decision.status = decision.reasons.empty() ? GateStatus::keep : GateStatus::reject;
  return decision;
}

inline CurationSample parse_curation_sample(const data::JsonlRecord& rec,
                                            const std::filesystem::path& path) {
  const auto& j = rec.value;
  if (!j.is_object()) throw data::schema_error(path, rec.line_no, "record is not an object");
  CurationSample out;
  out.raw = j;
  for (const char* field : {"sample_id", "visual_caption", "audio_caption"}) {
    if (!j.contains(field) || !j[field].is_string()) {
      throw data::schema_error(path, rec.line_no, std::string("missing field '") + field + "'");
    }
  }
  out.sample_id = j["sample_id"].get<std::string>();
  out.visual_caption = j["visual_caption"].get<std::string>();
  out.audio_caption = j["audio_caption"].get<std::string>();
  if (out.visual_caption.empty() || out.audio_caption.empty()) {
    throw data::schema_error(path, rec.line_no, "modality captions must be non-empty");
  }
  if (j.contains("fused_caption") && j["fused_caption"].is_string()) {
    out.fused_caption = j["fused_caption"].get<std::string>();
  }
  return out;
}

inline std::vector<CurationSample> load_curation_samples(const std::filesystem::path& path) {
  std::vector<CurationSample> out;
  for (const auto& rec : data::load_jsonl(path)) out.push_back(parse_curation_sample(rec, path));
  return out;
}

struct CurateOutcome {
  CurationSample sample;  // fused_caption filled in when fusion ran
  GateDecision decision;
};

/// Fuse-if-missing plus gate over a batch. Output order matches input order.
inline std::vector<CurateOutcome> curate(const std::vector<CurationSample>& samples,
                                         judge::JudgeGateway& gateway, const GateConfig& cfg,
                                         int jobs = 1) {
  validate(cfg);
  std::vector<CurateOutcome> out(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    CurateOutcome outcome;
    outcome.sample = samples[i];
    if (!outcome.sample.fused_caption) {
      try {
        outcome.sample.fused_caption = fuse_captions(outcome.sample, gateway);
      } catch (const Error& e) {
        outcome.decision.status = GateStatus::deferred;
        outcome.decision.error = std::string("fusion: ") + e.what();
        out[i] = std::move(outcome);
        return;
      }
    }
    outcome.decision = gate(outcome.sample, gateway, cfg);
    out[i] = std::move(outcome);
  });
  return out;
}

inline std::vector<nlohmann::json> curate_report_rows(const std::vector<CurateOutcome>& outcomes) {
  std::vector<nlohmann::json> rows;
  for (const auto& o : outcomes) {
    nlohmann::json row{{"sample_id", o.sample.sample_id},
                       {"visual_caption", o.sample.visual_caption},
                       {"audio_caption", o.sample.audio_caption},
                       {"decision", std::string(to_string(o.decision.status))},
                       {"reasons", o.decision.reasons}};
    if (o.sample.fused_caption) row["fused_caption"] = *o.sample.fused_caption;
    if (o.decision.completeness_score) row["completeness_score"] = *o.decision.completeness_score;
    if (o.decision.error) row["error"] = *o.decision.error;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace avcap::curation
