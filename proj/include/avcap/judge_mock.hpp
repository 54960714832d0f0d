#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "avcap/dialogue.hpp"
#include "avcap/errors.hpp"
#include "avcap/hash.hpp"
#include "avcap/judge_types.hpp"

namespace avcap::judge {

/// Rule table for the deterministic mock judge. Every lookup is
/// content-addressed (caption and speaker-pair rules are keyed by hash), and
/// an unmapped query raises RuleMissingError instead of guessing. The one
/// explicit exception is fusion: when fusion_fallback is `interleave`, fusion
/// queries without a canned answer get a deterministic sentence interleave of
/// the two source captions.
struct MockJudgeRules {
  enum class FusionFallback { none, interleave };

  std::unordered_map<std::string, int> keypoint_verdicts;  // digest(caption, id) -> 0/1
  std::unordered_map<std::string, bool> speaker_verdicts;  // digest(gen, gt) -> consistent
  std::unordered_map<std::string, std::string> canned_answers;        // item id -> letter / "N/A"
  std::unordered_map<std::string, dialogue::DialogueSequence> canned_dialogues;  // digest(caption)
  std::unordered_map<std::string, std::vector<std::string>> canned_keypoints;    // digest(caption)
  std::unordered_map<std::string, int> canned_scores;                 // sample id -> 1..5
  std::unordered_map<std::string, std::string> canned_fusions;        // sample id -> fused text
  FusionFallback fusion_fallback = FusionFallback::none;

  static std::string caption_key(std::string_view caption) { return digest({caption}); }
  static std::string keypoint_key(std::string_view caption, int keypoint_id) {
    return digest({caption, std::to_string(keypoint_id)});
  }
  static std::string pair_key(std::string_view gen_speaker, std::string_view gt_speaker) {
    return digest({gen_speaker, gt_speaker});
  }

  // Builder helpers used by tests and fixture tooling.
  void add_keypoint_verdict(std::string_view caption, int keypoint_id, int verdict) {
    keypoint_verdicts[keypoint_key(caption, keypoint_id)] = verdict;
  }
  void add_speaker_verdict(std::string_view gen_speaker, std::string_view gt_speaker,
                           bool consistent) {
    speaker_verdicts[pair_key(gen_speaker, gt_speaker)] = consistent;
  }
  void add_canned_dialogue(std::string_view caption, dialogue::DialogueSequence seq) {
    canned_dialogues[caption_key(caption)] = std::move(seq);
  }
  void add_canned_keypoints(std::string_view caption, std::vector<std::string> keypoints) {
    canned_keypoints[caption_key(caption)] = std::move(keypoints);
  }

  static MockJudgeRules from_json(const nlohmann::json& doc);
  static MockJudgeRules load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("MockJudgeRules: cannot open " + path.string());
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("MockJudgeRules: " + path.string() + ": " + e.what());
    }
    return from_json(doc);
  }
};

inline MockJudgeRules MockJudgeRules::from_json(const nlohmann::json& doc) {
  MockJudgeRules rules;
  const auto require_string = [](const nlohmann::json& obj, const char* field,
                                 const char* section) -> std::string {
    if (!obj.contains(field) || !obj[field].is_string()) {
      throw SchemaError(std::string("MockJudgeRules: ") + section + " entry missing string '" +
                        field + "'");
    }
    return obj[field].get<std::string>();
  };

  if (doc.contains("fusion_fallback")) {
    const auto mode = doc["fusion_fallback"].get<std::string>();
    if (mode == "interleave") {
      rules.fusion_fallback = FusionFallback::interleave;
    } else if (mode == "none") {
      rules.fusion_fallback = FusionFallback::none;
    } else {
      throw SchemaError("MockJudgeRules: unknown fusion_fallback '" + mode + "'");
    }
  }
  for (const auto& e : doc.value("keypoint_verdicts", nlohmann::json::array())) {
    const auto caption = require_string(e, "caption", "keypoint_verdicts");
    if (!e.contains("keypoint_id") || !e.contains("verdict")) {
      throw SchemaError("MockJudgeRules: keypoint_verdicts entry needs keypoint_id and verdict");
    }
    rules.add_keypoint_verdict(caption, e["keypoint_id"].get<int>(), e["verdict"].get<int>());
  }
  for (const auto& e : doc.value("speaker_verdicts", nlohmann::json::array())) {
    rules.add_speaker_verdict(require_string(e, "gen_speaker", "speaker_verdicts"),
                              require_string(e, "gt_speaker", "speaker_verdicts"),
                              e.value("consistent", false));
  }
  for (const auto& e : doc.value("canned_answers", nlohmann::json::array())) {
    rules.canned_answers[require_string(e, "item_id", "canned_answers")] =
        require_string(e, "answer", "canned_answers");
  }
  for (const auto& e : doc.value("canned_dialogues", nlohmann::json::array())) {
    dialogue::DialogueSequence seq;
    for (const auto& u : e.value("units", nlohmann::json::array())) {
      seq.units.push_back({require_string(u, "speaker", "canned_dialogues"),
                           require_string(u, "content", "canned_dialogues")});
    }
    rules.add_canned_dialogue(require_string(e, "caption", "canned_dialogues"), std::move(seq));
  }
  for (const auto& e : doc.value("canned_keypoints", nlohmann::json::array())) {
    std::vector<std::string> kps;
    for (const auto& k : e.value("keypoints", nlohmann::json::array())) {
      kps.push_back(k.get<std::string>());
    }
    rules.add_canned_keypoints(require_string(e, "caption", "canned_keypoints"), std::move(kps));
  }
  for (const auto& e : doc.value("canned_scores", nlohmann::json::array())) {
    rules.canned_scores[require_string(e, "sample_id", "canned_scores")] = e.value("score", 0);
  }
  for (const auto& e : doc.value("canned_fusions", nlohmann::json::array())) {
    rules.canned_fusions[require_string(e, "sample_id", "canned_fusions")] =
        require_string(e, "fused", "canned_fusions");
  }
  return rules;
}

namespace detail {

/// Splits text into sentences at '.', '!', '?' boundaries; the terminator
/// stays with its sentence. Used only by the mock fusion fallback.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (const char c : text) {
    current.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      while (!current.empty() && current.front() == ' ') current.erase(current.begin());
      if (!current.empty()) out.push_back(current);
      current.clear();
    }
  }
  while (!current.empty() && current.front() == ' ') current.erase(current.begin());
  if (!current.empty()) out.push_back(current);
  return out;
}

inline std::string interleave_sentences(std::string_view a, std::string_view b) {
  const auto sa = split_sentences(a);
  const auto sb = split_sentences(b);
  std::string out;
  const std::size_t n = std::max(sa.size(), sb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i < sa.size()) {
      if (!out.empty()) out.push_back(' ');
      out += sa[i];
    }
    if (i < sb.size()) {
      if (!out.empty()) out.push_back(' ');
      out += sb[i];
    }
  }
  return out;
}

}  // namespace detail

/// Deterministic judge: resolves each protocol from the rule table and emits
/// a response in exactly the textual format the real judges use, so the
/// strict parsers exercise the same path in tests as in production.
class MockTransport : public JudgeTransport {
 public:
  explicit MockTransport(MockJudgeRules rules) : rules_(std::move(rules)) {}

  std::string send(const JudgeRequest& req) override {
    switch (req.protocol) {
      case Protocol::extract_dialogues: return extract_dialogues(req);
      case Protocol::decompose_keypoints: return decompose_keypoints(req);
      case Protocol::judge_keypoints: return judge_keypoints(req);
      case Protocol::speaker_consistency: return speaker_consistency(req);
      case Protocol::answer_mcq: return answer_mcq(req);
      case Protocol::score_completeness: return score_completeness(req);
      case Protocol::fuse_captions: return fuse_captions(req);
      default:
        throw RuleMissingError("mock judge: protocol not supported: " +
                               std::string(to_string(req.protocol)));
    }
  }

  const MockJudgeRules& rules() const noexcept { return rules_; }

 private:
  [[noreturn]] static void missing(const JudgeRequest& req, const std::string& what) {
    throw RuleMissingError("mock judge: no rule for " + std::string(to_string(req.protocol)) +
                           " (" + what + ")");
  }

  std::string extract_dialogues(const JudgeRequest& req) const {
    const auto caption = req.payload.at("caption").get<std::string>();
    const auto it = rules_.canned_dialogues.find(MockJudgeRules::caption_key(caption));
    if (it == rules_.canned_dialogues.end()) missing(req, "caption hash " + MockJudgeRules::caption_key(caption));
    if (it->second.empty()) return "None.";
    std::string out;
    for (const auto& unit : it->second.units) {
      out += unit.speaker;
      out += ": \"";
      out += unit.content;
      out += "\"\n";
    }
    return out;
  }

  std::string decompose_keypoints(const JudgeRequest& req) const {
    const auto caption = req.payload.at("caption").get<std::string>();
    const auto it = rules_.canned_keypoints.find(MockJudgeRules::caption_key(caption));
    if (it == rules_.canned_keypoints.end()) missing(req, "caption hash " + MockJudgeRules::caption_key(caption));
    return nlohmann::json(it->second).dump();
  }

  std::string judge_keypoints(const JudgeRequest& req) const {
    const auto caption = req.payload.at("caption").get<std::string>();
    std::vector<std::string> mentioned;
    for (const auto& kp : req.payload.at("keypoints")) {
      const int id = kp.at("id").get<int>();
      const auto it = rules_.keypoint_verdicts.find(MockJudgeRules::keypoint_key(caption, id));
      if (it == rules_.keypoint_verdicts.end()) {
        missing(req, "keypoint id " + std::to_string(id));
      }
      if (it->second == 1) mentioned.push_back(kp.at("text").get<std::string>());
    }
    nlohmann::json out{{"Count of correctly mentioned keypoints", mentioned.size()},
                       {"Correctly mentioned keypoints", mentioned}};
    return out.dump();
  }

  std::string speaker_consistency(const JudgeRequest& req) const {
    std::string out;
    for (const auto& pair : req.payload.at("pairs")) {
      const auto gen = pair.at(0).get<std::string>();
      const auto gt = pair.at(1).get<std::string>();
      const auto it = rules_.speaker_verdicts.find(MockJudgeRules::pair_key(gen, gt));
      if (it == rules_.speaker_verdicts.end()) missing(req, "pair '" + gen + "' / '" + gt + "'");
      if (!out.empty()) out.push_back(' ');
      out += it->second ? "Yes" : "No";
    }
    return out;
  }

  std::string answer_mcq(const JudgeRequest& req) const {
    const auto it = rules_.canned_answers.find(req.key);
    if (it == rules_.canned_answers.end()) missing(req, "item id '" + req.key + "'");
    return it->second;
  }

  std::string score_completeness(const JudgeRequest& req) const {
    const auto it = rules_.canned_scores.find(req.key);
    if (it == rules_.canned_scores.end()) missing(req, "sample id '" + req.key + "'");
    return std::to_string(it->second);
  }

  std::string fuse_captions(const JudgeRequest& req) const {
    const auto it = rules_.canned_fusions.find(req.key);
    if (it != rules_.canned_fusions.end()) return it->second;
    if (rules_.fusion_fallback == MockJudgeRules::FusionFallback::interleave) {
      return detail::interleave_sentences(req.payload.at("visual_caption").get<std::string>(),
                                          req.payload.at("audio_caption").get<std::string>());
    }
    missing(req, "sample id '" + req.key + "'");
  }

  MockJudgeRules rules_;
};

}  // namespace avcap::judge
