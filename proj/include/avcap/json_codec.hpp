#pragma once

#include <nlohmann/json.hpp>

#include "avcap/alignment.hpp"
#include "avcap/dialogue.hpp"
#include "avcap/rewards.hpp"
#include "avcap/text_metrics.hpp"

// nlohmann ADL hooks for the domain types that cross a file boundary
// (reports, cache entries, fixtures).

namespace avcap::dialogue {

inline void to_json(nlohmann::json& j, const DialogueUnit& u) {
  j = nlohmann::json{{"speaker", u.speaker}, {"content", u.content}};
}

inline void from_json(const nlohmann::json& j, DialogueUnit& u) {
  j.at("speaker").get_to(u.speaker);
  j.at("content").get_to(u.content);
}

inline void to_json(nlohmann::json& j, const DialogueSequence& s) {
  j = nlohmann::json::array();
  for (const auto& u : s.units) j.push_back(u);
}

inline void from_json(const nlohmann::json& j, DialogueSequence& s) {
  s.units.clear();
  for (const auto& item : j) s.units.push_back(item.get<DialogueUnit>());
}

inline void to_json(nlohmann::json& j, const MatchedPair& p) {
  j = nlohmann::json{
      {"gen_index", p.gen_index}, {"gt_index", p.gt_index}, {"similarity", p.similarity}};
}

inline void to_json(nlohmann::json& j, const AlignmentResult& r) {
  j = nlohmann::json{{"content_score", r.content_score}, {"matched_pairs", r.matched_pairs}};
}

}  // namespace avcap::dialogue

namespace avcap::rewards {

inline void to_json(nlohmann::json& j, const Keypoint& k) {
  j = nlohmann::json{{"id", k.id}, {"text", k.text}};
  if (k.dimension) j["dimension"] = std::string(to_string(*k.dimension));
}

inline void from_json(const nlohmann::json& j, Keypoint& k) {
  j.at("id").get_to(k.id);
  j.at("text").get_to(k.text);
  k.dimension.reset();
  if (j.contains("dimension") && j["dimension"].is_string()) {
    k.dimension = keypoint_dimension_from_string(j["dimension"].get<std::string>());
  }
}

inline void to_json(nlohmann::json& j, const KeypointInventory& inv) {
  j = nlohmann::json{{"source_caption_id", inv.source_caption_id}, {"keypoints", inv.keypoints}};
}

inline void to_json(nlohmann::json& j, const RewardAudit& a) {
  j = nlohmann::json{{"matched_keypoint_ids", a.matched_keypoint_ids},
                     {"vacuous_inventory", a.vacuous_inventory},
                     {"alignment", a.alignment},
                     {"speaker_verdicts", a.speaker_verdicts},
                     {"measured_length", a.measured_length}};
}

inline void to_json(nlohmann::json& j, const RewardBreakdown& b) {
  j = nlohmann::json{{"r_checklist", b.r_checklist},
                     {"r_dialogue", b.r_dialogue},
                     {"r_length", b.r_length},
                     {"total", b.total},
                     {"audit", b.audit}};
}

}  // namespace avcap::rewards

namespace avcap::text {

inline void to_json(nlohmann::json& j, const RepetitionEvidence& e) {
  j = nlohmann::json{{"ngram", e.ngram}, {"count", e.count}};
}

}  // namespace avcap::text
