#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "avcap/dialogue.hpp"
#include "avcap/errors.hpp"
#include "avcap/json_codec.hpp"
#include "avcap/judge_client.hpp"
#include "avcap/judge_parsers.hpp"
#include "avcap/judge_types.hpp"
#include "avcap/prompts.hpp"
#include "avcap/rewards.hpp"

namespace avcap::judge {

struct McqChoice {
  char label = 'A';
  std::string text;
};

/// Protocol-level judge interface: renders the template for each protocol,
/// sends it through the caching/retrying client, and runs the strict parser
/// on the response. One gateway per endpoint; protocols that use different
/// judge models in production can simply hold separate gateways.
class JudgeGateway {
 public:
  JudgeGateway(JudgeEndpointConfig cfg, std::shared_ptr<JudgeTransport> transport,
               std::shared_ptr<const PromptLibrary> prompts)
      : client_(std::move(cfg), std::move(transport)), prompts_(std::move(prompts)) {
    if (!prompts_) throw ConfigError("JudgeGateway: no prompt library");
  }

  /// Extracts structured dialogue from a caption (empty on "None.").
  dialogue::DialogueSequence extract_dialogues(std::string_view caption) {
    JudgeRequest req;
    req.protocol = Protocol::extract_dialogues;
    req.prompt = prompts_->render(req.protocol, {{"video_description", std::string(caption)}});
    req.payload = {{"caption", std::string(caption)}};
    const auto call = client_.cached_call(req);
    auto seq = parse_dialogue_response(call.raw);
    seq.source = dialogue::Source::generated;
    client_.store_parsed(call, req, nlohmann::json(seq));
    return seq;
  }

  /// Decomposes a caption into a keypoint inventory with sequential ids.
  /// A "Dimension Name: text" prefix, when the judge emits one, becomes the
  /// keypoint's taxonomy tag; otherwise the dimension stays unset.
  rewards::KeypointInventory decompose_keypoints(std::string_view caption,
                                                 std::string_view source_caption_id = "") {
    JudgeRequest req;
    req.protocol = Protocol::decompose_keypoints;
    req.prompt = prompts_->render(req.protocol, {{"video_caption", std::string(caption)}});
    req.payload = {{"caption", std::string(caption)}};
    const auto call = client_.cached_call(req);
    const auto texts = parse_string_list(call.raw);
    rewards::KeypointInventory inventory;
    inventory.source_caption_id = std::string(source_caption_id);
    int next_id = 0;
    for (const auto& text : texts) {
      rewards::Keypoint kp;
      kp.id = next_id++;
      kp.text = text;
      strip_dimension_prefix(kp);
      inventory.keypoints.push_back(std::move(kp));
    }
    client_.store_parsed(call, req, nlohmann::json(inventory));
    return inventory;
  }

  /// Binary verdict per inventory keypoint. The judge reports a count plus
  /// the list of correctly mentioned keypoints; a count/list mismatch or an
  /// unknown keypoint string is a validation failure, re-asked up to the
  /// configured retry budget before giving up.
  std::vector<int> judge_keypoints(std::string_view caption,
                                   const rewards::KeypointInventory& inventory) {
    if (inventory.empty()) throw ArgumentError("judge_keypoints: empty inventory");
    JudgeRequest req;
    req.protocol = Protocol::judge_keypoints;
    nlohmann::json kp_texts = nlohmann::json::array();
    nlohmann::json kp_payload = nlohmann::json::array();
    for (const auto& kp : inventory.keypoints) {
      kp_texts.push_back(kp.text);
      kp_payload.push_back({{"id", kp.id}, {"text", kp.text}});
    }
    req.prompt = prompts_->render(req.protocol,
                                  {{"num_keypoints", std::to_string(inventory.size())},
                                   {"keypoints", kp_texts.dump()},
                                   {"video_caption", std::string(caption)}});
    req.payload = {{"caption", std::string(caption)}, {"keypoints", kp_payload}};

    const int budget = client_.config().max_retries;
    for (int attempt = 0;; ++attempt) {
      const auto call = client_.cached_call(req, /*force_refresh=*/attempt > 0);
      try {
        const auto parsed = parse_keypoint_verdicts(call.raw);
        std::vector<int> verdicts(inventory.size(), 0);
        for (const auto& text : parsed.mentioned) {
          bool found = false;
          for (std::size_t i = 0; i < inventory.size(); ++i) {
            if (inventory.keypoints[i].text == text) {
              verdicts[i] = 1;
              found = true;
              break;
            }
          }
          if (!found) {
            throw ValidationError("keypoint verdicts: unknown keypoint '" + text + "'", call.raw);
          }
        }
        client_.store_parsed(call, req, nlohmann::json(verdicts));
        return verdicts;
      } catch (const ValidationError&) {
        if (attempt >= budget) throw;
      }
    }
  }

  /// Speaker consistency verdicts for matched pairs, in order. The video is
  /// passed as an opaque reference; this artifact never decodes media.
  std::vector<bool> judge_speaker_pairs(
      std::string_view video_ref,
      const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (pairs.empty()) throw ArgumentError("judge_speaker_pairs: empty pair list");
    JudgeRequest req;
    req.protocol = Protocol::speaker_consistency;
    req.key = std::string(video_ref);
    std::string rendered_pairs;
    nlohmann::json payload_pairs = nlohmann::json::array();
    for (const auto& [gen, gt] : pairs) {
      if (!rendered_pairs.empty()) rendered_pairs.push_back('\n');
      rendered_pairs += "\"" + gen + "\" | \"" + gt + "\"";
      payload_pairs.push_back({gen, gt});
    }
    req.prompt = prompts_->render(req.protocol, {{"dialogue_pairs", rendered_pairs}});
    req.payload = {{"video_ref", std::string(video_ref)}, {"pairs", payload_pairs}};
    const auto call = client_.cached_call(req);
    const auto verdicts = parse_yes_no_sequence(call.raw, pairs.size());
    client_.store_parsed(call, req, nlohmann::json(verdicts));
    return verdicts;
  }

  /// Answers a multiple-choice question from the caption text alone.
  McqAnswer answer_mcq(std::string_view caption, std::string_view question,
                       const std::vector<McqChoice>& choices, std::string_view item_id) {
    if (choices.size() < 2) throw ArgumentError("answer_mcq: need at least two choices");
    for (std::size_t i = 0; i < choices.size(); ++i) {
      if (choices[i].label != static_cast<char>('A' + i)) {
        throw ArgumentError("answer_mcq: choices must be labeled A, B, ... consecutively");
      }
    }
    JudgeRequest req;
    req.protocol = Protocol::answer_mcq;
    req.key = std::string(item_id);
    std::string rendered_choices;
    for (const auto& c : choices) {
      if (!rendered_choices.empty()) rendered_choices.push_back('\n');
      rendered_choices.push_back(c.label);
      rendered_choices += ". " + c.text;
    }
    req.prompt = prompts_->render(req.protocol, {{"video_caption", std::string(caption)},
                                                 {"question", std::string(question)},
                                                 {"choices", rendered_choices}});
    req.payload = {{"item_id", std::string(item_id)}};
    const auto call = client_.cached_call(req);
    const auto answer = parse_mcq_answer(call.raw, choices.size());
    nlohmann::json parsed{{"refused", answer.refused}, {"format_warning", answer.format_warning}};
    if (answer.letter) parsed["letter"] = std::string(1, *answer.letter);
    client_.store_parsed(call, req, parsed);
    return answer;
  }

  /// Synthesis-completeness score (1-5) for a fused caption.
  int score_completeness(std::string_view visual_caption, std::string_view audio_caption,
                         std::string_view fused_caption, std::string_view sample_id) {
    if (visual_caption.empty() || audio_caption.empty() || fused_caption.empty()) {
      throw ArgumentError("score_completeness: all three captions must be non-empty");
    }
    JudgeRequest req;
    req.protocol = Protocol::score_completeness;
    req.key = std::string(sample_id);
    req.prompt = prompts_->render(req.protocol, {{"visual_caption", std::string(visual_caption)},
                                                 {"audio_caption", std::string(audio_caption)},
                                                 {"fused_caption", std::string(fused_caption)}});
    req.payload = {{"sample_id", std::string(sample_id)}};
    const auto call = client_.cached_call(req);
    const int score = parse_completeness_score(call.raw);
    client_.store_parsed(call, req, nlohmann::json(score));
    return score;
  }

  /// Fuses modality captions into one narrative. The judge's text is returned
  /// as-is; no local post-editing.
  std::string fuse_captions(std::string_view visual_caption, std::string_view audio_caption,
                            std::string_view sample_id) {
    JudgeRequest req;
    req.protocol = Protocol::fuse_captions;
    req.key = std::string(sample_id);
    req.prompt = prompts_->render(req.protocol, {{"visual_caption", std::string(visual_caption)},
                                                 {"audio_caption", std::string(audio_caption)}});
    req.payload = {{"sample_id", std::string(sample_id)},
                   {"visual_caption", std::string(visual_caption)},
                   {"audio_caption", std::string(audio_caption)}};
    const auto call = client_.cached_call(req);
    client_.store_parsed(call, req, nlohmann::json(call.raw));
    return call.raw;
  }

  /// Adapter for rewards::checklist_reward.
  rewards::KeypointJudge keypoint_judge() {
    return [this](std::string_view caption, const rewards::KeypointInventory& inventory) {
      return judge_keypoints(caption, inventory);
    };
  }

  /// Adapter for rewards::dialogue_reward, bound to one video reference.
  rewards::SpeakerJudge speaker_judge(std::string video_ref) {
    return [this, video_ref = std::move(video_ref)](
               const std::vector<std::pair<std::string, std::string>>& pairs) {
      return judge_speaker_pairs(video_ref, pairs);
    };
  }

  JudgeClient& client() noexcept { return client_; }

 private:
  static void strip_dimension_prefix(rewards::Keypoint& kp) {
    static const std::pair<std::string_view, rewards::KeypointDimension> kPrefixes[] = {
        {"Static Entity Description", rewards::KeypointDimension::static_entity},
        {"Dynamic Action & Interaction", rewards::KeypointDimension::dynamic_action},
        {"Auditory Elements", rewards::KeypointDimension::auditory},
        {"Spatio-temporal & Cinematography", rewards::KeypointDimension::spatiotemporal_cinematography},
        {"Cross-modal Narrative Logic", rewards::KeypointDimension::cross_modal_narrative},
    };
    for (const auto& [prefix, dim] : kPrefixes) {
      if (kp.text.size() > prefix.size() + 1 && kp.text.compare(0, prefix.size(), prefix) == 0 &&
          kp.text[prefix.size()] == ':') {
        std::size_t start = prefix.size() + 1;
        while (start < kp.text.size() && kp.text[start] == ' ') ++start;
        kp.text = kp.text.substr(start);
        kp.dimension = dim;
        return;
      }
    }
  }

  JudgeClient client_;
  std::shared_ptr<const PromptLibrary> prompts_;
};

}  // namespace avcap::judge
