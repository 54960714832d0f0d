#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "avcap/alignment.hpp"
#include "avcap/dialogue.hpp"
#include "avcap/errors.hpp"
#include "avcap/text_metrics.hpp"

namespace avcap::rewards {

/// Taxonomy for decomposed ground-truth keypoints.
enum class KeypointDimension {
  cross_modal_narrative,
  dynamic_action,
  auditory,
  spatiotemporal_cinematography,
  static_entity,
};

inline std::string_view to_string(KeypointDimension d) {
  switch (d) {
    case KeypointDimension::cross_modal_narrative: return "cross_modal_narrative";
    case KeypointDimension::dynamic_action: return "dynamic_action";
    case KeypointDimension::auditory: return "auditory";
    case KeypointDimension::spatiotemporal_cinematography: return "spatiotemporal_cinematography";
    case KeypointDimension::static_entity: return "static_entity";
  }
  return "unknown";
}

inline std::optional<KeypointDimension> keypoint_dimension_from_string(std::string_view s) {
  if (s == "cross_modal_narrative") return KeypointDimension::cross_modal_narrative;
  if (s == "dynamic_action") return KeypointDimension::dynamic_action;
  if (s == "auditory") return KeypointDimension::auditory;
  if (s == "spatiotemporal_cinematography") return KeypointDimension::spatiotemporal_cinematography;
  if (s == "static_entity") return KeypointDimension::static_entity;
  return std::nullopt;
}

/// One atomic fact from a decomposed ground-truth caption. The dimension is
/// absent when the decomposing judge did not tag it.
struct Keypoint {
  int id = 0;
  std::string text;
  std::optional<KeypointDimension> dimension;
};

struct KeypointInventory {
  std::vector<Keypoint> keypoints;
  std::string source_caption_id;

  std::size_t size() const noexcept { return keypoints.size(); }
  bool empty() const noexcept { return keypoints.empty(); }
};

/// Returns one binary verdict per keypoint (1 = the caption correctly mentions it).
using KeypointJudge =
    std::function<std::vector<int>(std::string_view caption, const KeypointInventory&)>;

/// Returns one consistency verdict per (generated speaker, ground-truth speaker) pair.
using SpeakerJudge =
    std::function<std::vector<bool>(const std::vector<std::pair<std::string, std::string>>&)>;

struct ChecklistResult {
  double score = 0.0;          // fraction of keypoints judged correct, in [0,1]
  std::vector<int> matched_ids;
  bool vacuous_inventory = false;  // |K| == 0: score fixed at 1.0, flagged for audit
};

/// Checklist coverage reward: the fraction of inventory keypoints the judge
/// marks as correctly mentioned. An empty inventory scores 1.0 (vacuously
/// covered) and is flagged so downstream audits can see it.
inline ChecklistResult checklist_reward(std::string_view caption, const KeypointInventory& inventory,
                                        const KeypointJudge& judge) {
  ChecklistResult result;
  if (inventory.empty()) {
    result.score = 1.0;
    result.vacuous_inventory = true;
    return result;
  }
  if (!judge) throw ArgumentError("checklist_reward: no keypoint judge supplied");
  const std::vector<int> verdicts = judge(caption, inventory);
  if (verdicts.size() != inventory.size()) {
    throw ArgumentError("checklist_reward: judge returned " + std::to_string(verdicts.size()) +
                        " verdicts for " + std::to_string(inventory.size()) + " keypoints");
  }
  int matched = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (verdicts[i] != 0 && verdicts[i] != 1) {
      throw ArgumentError("checklist_reward: verdicts must be binary");
    }
    if (verdicts[i] == 1) {
      ++matched;
      result.matched_ids.push_back(inventory.keypoints[i].id);
    }
  }
  result.score = static_cast<double>(matched) / static_cast<double>(inventory.size());
  return result;
}

struct DialogueRewardResult {
  double score = 0.0;  // F1 of dialogue precision/recall, in [0,1]
  dialogue::AlignmentResult alignment;
  std::vector<bool> speaker_verdicts;  // one per matched pair, canonical order
  std::size_t gen_len = 0;             // N
  std::size_t gt_len = 0;              // M
  double s_content = 0.0;
  double s_speaker = 0.0;
  double s_combined = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Dialogue fidelity reward.
///
/// Aligns the two sequences on content similarity (threshold gamma), then
/// checks speaker consistency on the matched pairs. With S_content the total
/// matched similarity and S_speaker the count of speaker-consistent pairs,
///
///   S_combined = (S_speaker + S_content) / 2
///   Rec = S_combined / M,  Prec = S_combined / N,  score = F1(Prec, Rec)
///
/// Degenerate sequences are decided rather than divided by zero: both empty
/// scores 1.0 (no dialogue expected, none produced), exactly one empty scores
/// 0.0 (missed or fabricated dialogue), and Prec + Rec == 0 scores 0.0.
inline DialogueRewardResult dialogue_reward(const dialogue::DialogueSequence& gen,
                                            const dialogue::DialogueSequence& gt,
                                            const SpeakerJudge& speaker_judge, double gamma) {
  dialogue::detail::check_gamma(gamma);
  DialogueRewardResult result;
  result.gen_len = gen.size();
  result.gt_len = gt.size();

  if (gen.empty() && gt.empty()) {
    result.score = 1.0;
    result.precision = 1.0;
    result.recall = 1.0;
    return result;
  }
  if (gen.empty() || gt.empty()) {
    result.score = 0.0;
    return result;
  }

  result.alignment = dialogue::align(gen, gt, gamma);
  result.s_content = result.alignment.content_score;

  if (!result.alignment.matched_pairs.empty()) {
    if (!speaker_judge) throw ArgumentError("dialogue_reward: no speaker judge supplied");
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(result.alignment.matched_pairs.size());
    for (const auto& p : result.alignment.matched_pairs) {
      pairs.emplace_back(gen.units[p.gen_index].speaker, gt.units[p.gt_index].speaker);
    }
    result.speaker_verdicts = speaker_judge(pairs);
    if (result.speaker_verdicts.size() != pairs.size()) {
      throw ArgumentError("dialogue_reward: speaker judge returned wrong number of verdicts");
    }
    for (const bool v : result.speaker_verdicts) {
      if (v) result.s_speaker += 1.0;
    }
  }

  result.s_combined = (result.s_speaker + result.s_content) / 2.0;
  result.recall = result.s_combined / static_cast<double>(result.gt_len);
  result.precision = result.s_combined / static_cast<double>(result.gen_len);
  const double denom = result.precision + result.recall;
  result.score = denom > 0.0 ? 2.0 * result.precision * result.recall / denom : 0.0;
  return result;
}

struct LengthRewardConfig {
  std::size_t tau1 = 2048;  // full reward below this many tokens
  std::size_t tau2 = 4096;  // zero reward at and above this many tokens
  text::TokenizerSpec tokenizer;
};

inline void validate(const LengthRewardConfig& cfg) {
  if (cfg.tau1 == 0 || cfg.tau2 == 0 || cfg.tau1 >= cfg.tau2) {
    throw ArgumentError("LengthRewardConfig: requires 0 < tau1 < tau2");
  }
}

/// Piecewise-linear length regularizer: 1 below tau1, linear decay on
/// [tau1, tau2), 0 from tau2 on.
inline double length_reward(std::size_t length, const LengthRewardConfig& cfg) {
  validate(cfg);
  if (length < cfg.tau1) return 1.0;
  if (length < cfg.tau2) {
    return 1.0 - static_cast<double>(length - cfg.tau1) / static_cast<double>(cfg.tau2 - cfg.tau1);
  }
  return 0.0;
}

inline double length_reward_for_text(std::string_view caption, const LengthRewardConfig& cfg) {
  return length_reward(text::token_length(caption, cfg.tokenizer), cfg);
}

/// Audit trail for one scored caption: the evidence behind each component.
struct RewardAudit {
  std::vector<int> matched_keypoint_ids;
  bool vacuous_inventory = false;
  dialogue::AlignmentResult alignment;
  std::vector<bool> speaker_verdicts;
  std::size_t measured_length = 0;
};

struct RewardBreakdown {
  double r_checklist = 0.0;
  double r_dialogue = 0.0;
  double r_length = 0.0;
  double total = 0.0;  // always the sum of the three components
  RewardAudit audit;
};

/// Combines the three component rewards into the training reward, keeping the
/// per-component evidence attached.
inline RewardBreakdown total_reward(const ChecklistResult& checklist,
                                    const DialogueRewardResult& dialogue_result, double r_length,
                                    std::size_t measured_length) {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(checklist.score) || !in_unit(dialogue_result.score) || !in_unit(r_length)) {
    throw ArgumentError("total_reward: components must lie in [0, 1]");
  }
  RewardBreakdown out;
  out.r_checklist = checklist.score;
  out.r_dialogue = dialogue_result.score;
  out.r_length = r_length;
  out.total = out.r_checklist + out.r_dialogue + out.r_length;
  out.audit.matched_keypoint_ids = checklist.matched_ids;
  out.audit.vacuous_inventory = checklist.vacuous_inventory;
  out.audit.alignment = dialogue_result.alignment;
  out.audit.speaker_verdicts = dialogue_result.speaker_verdicts;
  out.audit.measured_length = measured_length;
  return out;
}

}  // namespace avcap::rewards
