#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avcap/dialogue.hpp"
#include "avcap/errors.hpp"
#include "avcap/json_codec.hpp"
#include "avcap/jsonl.hpp"
#include "avcap/judge_gateway.hpp"
#include "avcap/rewards.hpp"

// Dataset record schemas. The raw json object is kept on every record so
// unknown fields survive a load/save round trip.

namespace avcap::data {

struct CaptionRecord {
  std::string video_id;
  std::string caption;
  std::optional<std::string> gt_caption;
  std::optional<dialogue::DialogueSequence> gt_dialogue;
  std::optional<rewards::KeypointInventory> keypoints;
  nlohmann::json raw;
};

inline CaptionRecord parse_caption_record(const JsonlRecord& rec,
                                          const std::filesystem::path& path) {
  const auto& j = rec.value;
  if (!j.is_object()) throw schema_error(path, rec.line_no, "record is not an object");
  CaptionRecord out;
  out.raw = j;
  if (!j.contains("video_id") || !j["video_id"].is_string()) {
    throw schema_error(path, rec.line_no, "missing field 'video_id'");
  }
  out.video_id = j["video_id"].get<std::string>();
  if (!j.contains("caption") || !j["caption"].is_string()) {
    throw schema_error(path, rec.line_no, "missing field 'caption'");
  }
  out.caption = j["caption"].get<std::string>();
  if (j.contains("gt_caption")) {
    if (!j["gt_caption"].is_string()) throw schema_error(path, rec.line_no, "'gt_caption' must be a string");
    out.gt_caption = j["gt_caption"].get<std::string>();
  }
  if (j.contains("gt_dialogue")) {
    if (!j["gt_dialogue"].is_array()) {
      throw schema_error(path, rec.line_no, "'gt_dialogue' must be an array of units");
    }
    dialogue::DialogueSequence seq;
    seq.source = dialogue::Source::ground_truth;
    for (const auto& u : j["gt_dialogue"]) {
      if (!u.is_object() || !u.contains("speaker") || !u.contains("content")) {
        throw schema_error(path, rec.line_no, "'gt_dialogue' unit needs speaker and content");
      }
      dialogue::DialogueUnit unit{u["speaker"].get<std::string>(), u["content"].get<std::string>()};
      if (unit.content.empty() && unit.speaker.empty()) {
        throw schema_error(path, rec.line_no, "'gt_dialogue' unit is entirely empty");
      }
      seq.units.push_back(std::move(unit));
    }
    out.gt_dialogue = std::move(seq);
  }
  if (j.contains("keypoints")) {
    if (!j["keypoints"].is_array()) {
      throw schema_error(path, rec.line_no, "'keypoints' must be an array");
    }
    rewards::KeypointInventory inv;
    inv.source_caption_id = out.video_id;
    int next_id = 0;
    for (const auto& k : j["keypoints"]) {
      if (!k.is_object() || !k.contains("text") || !k["text"].is_string()) {
        throw schema_error(path, rec.line_no, "'keypoints' entry needs a string 'text'");
      }
      rewards::Keypoint kp;
      kp.id = next_id++;
      kp.text = k["text"].get<std::string>();
      if (kp.text.empty()) {
        throw schema_error(path, rec.line_no, "'keypoints' entry has empty text");
      }
      if (k.contains("dimension") && k["dimension"].is_string()) {
        kp.dimension = rewards::keypoint_dimension_from_string(k["dimension"].get<std::string>());
        if (!kp.dimension) {
          throw schema_error(path, rec.line_no,
                             "unknown keypoint dimension '" + k["dimension"].get<std::string>() + "'");
        }
      }
      inv.keypoints.push_back(std::move(kp));
    }
    out.keypoints = std::move(inv);
  }
  return out;
}

inline std::vector<CaptionRecord> load_captions(const std::filesystem::path& path) {
  std::vector<CaptionRecord> out;
  std::set<std::string> seen;
  for (const auto& rec : load_jsonl(path)) {
    auto parsed = parse_caption_record(rec, path);
    if (!seen.insert(parsed.video_id).second) {
      throw schema_error(path, rec.line_no, "duplicate video_id '" + parsed.video_id + "'");
    }
    out.push_back(std::move(parsed));
  }
  return out;
}

struct QAItem {
  std::string id;
  std::string video_id;
  std::string question;
  std::vector<judge::McqChoice> choices;
  char answer = 'A';
  std::optional<std::string> category;
  nlohmann::json raw;
};

inline QAItem parse_qa_item(const JsonlRecord& rec, const std::filesystem::path& path) {
  const auto& j = rec.value;
  if (!j.is_object()) throw schema_error(path, rec.line_no, "record is not an object");
  QAItem out;
  out.raw = j;
  for (const char* field : {"id", "video_id", "question", "answer"}) {
    if (!j.contains(field) || !j[field].is_string()) {
      throw schema_error(path, rec.line_no, std::string("missing field '") + field + "'");
    }
  }
  out.id = j["id"].get<std::string>();
  out.video_id = j["video_id"].get<std::string>();
  out.question = j["question"].get<std::string>();
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].size() < 2) {
    throw schema_error(path, rec.line_no, "'choices' must be an array of at least 2 entries");
  }
  char expected = 'A';
  for (const auto& c : j["choices"]) {
    if (!c.is_object() || !c.contains("label") || !c.contains("text")) {
      throw schema_error(path, rec.line_no, "'choices' entry needs label and text");
    }
    const auto label = c["label"].get<std::string>();
    if (label.size() != 1 || label[0] != expected) {
      throw schema_error(path, rec.line_no,
                         "choice labels must be consecutive capital letters starting at 'A'");
    }
    out.choices.push_back({label[0], c["text"].get<std::string>()});
    ++expected;
  }
  const auto answer = j["answer"].get<std::string>();
  if (answer.size() != 1 || answer[0] < 'A' || answer[0] >= expected) {
    throw schema_error(path, rec.line_no, "'answer' must be one of the choice labels");
  }
  out.answer = answer[0];
  if (j.contains("category") && j["category"].is_string()) {
    out.category = j["category"].get<std::string>();
  }
  return out;
}

inline std::vector<QAItem> load_qa_items(const std::filesystem::path& path) {
  std::vector<QAItem> out;
  std::set<std::string> seen;
  for (const auto& rec : load_jsonl(path)) {
    auto item = parse_qa_item(rec, path);
    if (!seen.insert(item.id).second) {
      throw schema_error(path, rec.line_no, "duplicate item id '" + item.id + "'");
    }
    out.push_back(std::move(item));
  }
  return out;
}

/// A dialogue file holds one sequence: one {speaker, content} object per line.
inline dialogue::DialogueSequence load_dialogue_file(const std::filesystem::path& path,
                                                     dialogue::Source source) {
  dialogue::DialogueSequence seq;
  seq.source = source;
  for (const auto& rec : load_jsonl(path)) {
    const auto& j = rec.value;
    if (!j.is_object() || !j.contains("speaker") || !j.contains("content")) {
      throw schema_error(path, rec.line_no, "dialogue unit needs 'speaker' and 'content'");
    }
    seq.units.push_back({j["speaker"].get<std::string>(), j["content"].get<std::string>()});
  }
  return seq;
}

}  // namespace avcap::data
