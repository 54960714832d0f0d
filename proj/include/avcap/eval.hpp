#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "avcap/datasets.hpp"
#include "avcap/errors.hpp"
#include "avcap/json_codec.hpp"
#include "avcap/jsonl.hpp"
#include "avcap/judge_gateway.hpp"
#include "avcap/parallel.hpp"
#include "avcap/rewards.hpp"
#include "avcap/text_metrics.hpp"

namespace avcap::eval {

// ---------------------------------------------------------------------------
// QA-based caption evaluation: a judge answers multiple-choice questions from
// the caption text alone; refusals count as incorrect.
// ---------------------------------------------------------------------------

struct QAConfig {
  // When false, items whose video has no caption are excluded from the
  // accuracy denominator instead of counting as incorrect. Debugging aid;
  // the default mirrors refusal handling.
  bool count_missing_caption_as_incorrect = true;
  int jobs = 1;
};

struct ItemVerdict {
  std::string id;
  std::string video_id;
  std::optional<std::string> category;
  std::string predicted;  // answer letter, "N/A" for refusals, "" when skipped
  bool correct = false;
  bool refused = false;
  bool format_warning = false;
  bool skipped = false;  // no caption for this item's video
  std::optional<std::string> error;
};

struct CategoryStats {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  std::size_t total = 0;  // accuracy denominator
  std::size_t correct_count = 0;
  std::size_t refused_count = 0;
  std::size_t skipped_count = 0;
  double accuracy = 0.0;
  double refusal_rate = 0.0;
  double answered_rate = 1.0;
  std::map<std::string, CategoryStats> per_category;
  std::vector<ItemVerdict> verdicts;  // sorted by item id
};

inline EvalReport run_qa_eval(const std::vector<data::CaptionRecord>& captions,
                              const std::vector<data::QAItem>& items, judge::JudgeGateway& gateway,
                              const QAConfig& cfg = {}) {
  std::unordered_map<std::string, const data::CaptionRecord*> by_video;
  for (const auto& rec : captions) by_video.emplace(rec.video_id, &rec);

  std::vector<ItemVerdict> verdicts(items.size());
  parallel_for(items.size(), cfg.jobs, [&](std::size_t i) {
    const auto& item = items[i];
    ItemVerdict v;
    v.id = item.id;
    v.video_id = item.video_id;
    v.category = item.category;
    const auto found = by_video.find(item.video_id);
    if (found == by_video.end()) {
      v.skipped = true;
      v.error = "no caption for video_id '" + item.video_id + "'";
    } else {
      const auto answer =
          gateway.answer_mcq(found->second->caption, item.question, item.choices, item.id);
      v.refused = answer.refused;
      v.format_warning = answer.format_warning;
      v.predicted = answer.letter ? std::string(1, *answer.letter) : "N/A";
      v.correct = answer.letter && *answer.letter == item.answer;
    }
    verdicts[i] = std::move(v);
  });

  std::stable_sort(verdicts.begin(), verdicts.end(),
                   [](const ItemVerdict& a, const ItemVerdict& b) { return a.id < b.id; });

  EvalReport report;
  for (const auto& v : verdicts) {
    if (v.skipped) {
      ++report.skipped_count;
      if (!cfg.count_missing_caption_as_incorrect) continue;
    }
    ++report.total;
    if (v.correct) ++report.correct_count;
    if (v.refused) ++report.refused_count;
    const std::string cat = v.category.value_or("(uncategorized)");
    auto& stats = report.per_category[cat];
    ++stats.total;
    if (v.correct) ++stats.correct;
  }
  if (report.total > 0) {
    report.accuracy = static_cast<double>(report.correct_count) / static_cast<double>(report.total);
    report.refusal_rate =
        static_cast<double>(report.refused_count) / static_cast<double>(report.total);
  }
  report.answered_rate = 1.0 - report.refusal_rate;
  for (auto& [cat, stats] : report.per_category) {
    stats.accuracy =
        stats.total > 0 ? static_cast<double>(stats.correct) / static_cast<double>(stats.total) : 0.0;
  }
  report.verdicts = std::move(verdicts);
  return report;
}

inline std::vector<nlohmann::json> eval_report_rows(const EvalReport& report) {
  std::vector<nlohmann::json> rows;
  for (const auto& v : report.verdicts) {
    nlohmann::json row{{"type", "verdict"},       {"id", v.id},
                       {"video_id", v.video_id},  {"predicted", v.predicted},
                       {"correct", v.correct},    {"refused", v.refused},
                       {"format_warning", v.format_warning}, {"skipped", v.skipped}};
    if (v.category) row["category"] = *v.category;
    if (v.error) row["error"] = *v.error;
    rows.push_back(std::move(row));
  }
  nlohmann::json per_category = nlohmann::json::object();
  for (const auto& [cat, stats] : report.per_category) {
    per_category[cat] = {{"total", stats.total}, {"correct", stats.correct},
                         {"accuracy", stats.accuracy}};
  }
  rows.push_back(nlohmann::json{{"type", "summary"},
                                {"total", report.total},
                                {"correct", report.correct_count},
                                {"refused", report.refused_count},
                                {"skipped", report.skipped_count},
                                {"accuracy", report.accuracy},
                                {"refusal_rate", report.refusal_rate},
                                {"answered_rate", report.answered_rate},
                                {"per_category", per_category}});
  return rows;
}

inline void write_report(const EvalReport& report, const std::filesystem::path& path) {
  data::write_jsonl(path, eval_report_rows(report));
}

// ---------------------------------------------------------------------------
// Batch reward scoring with summary metrics.
// ---------------------------------------------------------------------------

struct ScoreConfig {
  double gamma = 0.6;
  rewards::LengthRewardConfig length;
  text::RepetitionConfig repetition;
  int jobs = 1;
};

struct ScoredRecord {
  std::string video_id;
  std::size_t measured_length = 0;
  double r_length = 0.0;
  bool collapsed = false;
  std::optional<text::RepetitionEvidence> evidence;
  std::optional<rewards::ChecklistResult> checklist;
  std::optional<rewards::DialogueRewardResult> dialogue_result;
  double total_present = 0.0;                  // sum of the components present
  std::vector<std::string> missing_components;  // "checklist"/"dialogue" when not applicable
  std::vector<std::string> errors;             // judge failures, per component
};

struct ComponentStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct ScoreSummary {
  std::size_t records = 0;
  std::size_t errored_records = 0;
  ComponentStats checklist;
  ComponentStats dialogue;
  ComponentStats length;
  double mean_dialogue_f1 = 0.0;  // same data as dialogue.mean, reported as the headline metric
  double repcol_rate = 0.0;       // fraction of captions with repetition collapse
};

struct ScoreResult {
  std::vector<ScoredRecord> records;
  ScoreSummary summary;
};

namespace detail {

inline ComponentStats component_stats(const std::vector<double>& values) {
  ComponentStats s;
  s.count = values.size();
  if (values.empty()) return s;
  for (const double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (const double v : values) s.stddev += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(s.stddev / static_cast<double>(values.size()));
  return s;
}

}  // namespace detail

/// Scores every record: the length reward and repetition check always apply;
/// the checklist reward needs a keypoint inventory and the dialogue reward a
/// ground-truth dialogue. Judge failures are recorded on the record and the
/// summary is computed over successes, with counts disclosed.
inline ScoreResult score_dataset(const std::vector<data::CaptionRecord>& records,
                                 judge::JudgeGateway& gateway, const ScoreConfig& cfg) {
  rewards::validate(cfg.length);
  ScoreResult result;
  result.records.resize(records.size());

  parallel_for(records.size(), cfg.jobs, [&](std::size_t i) {
    const auto& rec = records[i];
    ScoredRecord out;
    out.video_id = rec.video_id;
    out.measured_length = text::token_length(rec.caption, cfg.length.tokenizer);
    out.r_length = rewards::length_reward(out.measured_length, cfg.length);
    const auto rep =
        text::detect_repetition_collapse(rec.caption, cfg.length.tokenizer, cfg.repetition);
    out.collapsed = rep.collapsed;
    out.evidence = rep.evidence;
    out.total_present = out.r_length;

    if (rec.keypoints) {
      try {
        out.checklist =
            rewards::checklist_reward(rec.caption, *rec.keypoints, gateway.keypoint_judge());
        out.total_present += out.checklist->score;
      } catch (const Error& e) {
        out.errors.push_back(std::string("checklist: ") + e.what());
      }
    } else {
      out.missing_components.emplace_back("checklist");
    }

    if (rec.gt_dialogue) {
      try {
        const auto gen_dialogue = gateway.extract_dialogues(rec.caption);
        out.dialogue_result = rewards::dialogue_reward(
            gen_dialogue, *rec.gt_dialogue, gateway.speaker_judge(rec.video_id), cfg.gamma);
        out.total_present += out.dialogue_result->score;
      } catch (const Error& e) {
        out.errors.push_back(std::string("dialogue: ") + e.what());
      }
    } else {
      out.missing_components.emplace_back("dialogue");
    }
    result.records[i] = std::move(out);
  });

  std::vector<double> checklist_scores;
  std::vector<double> dialogue_scores;
  std::vector<double> length_scores;
  std::size_t collapsed_count = 0;
  for (const auto& r : result.records) {
    length_scores.push_back(r.r_length);
    if (r.checklist) checklist_scores.push_back(r.checklist->score);
    if (r.dialogue_result) dialogue_scores.push_back(r.dialogue_result->score);
    if (r.collapsed) ++collapsed_count;
    if (!r.errors.empty()) ++result.summary.errored_records;
  }
  result.summary.records = records.size();
  result.summary.checklist = detail::component_stats(checklist_scores);
  result.summary.dialogue = detail::component_stats(dialogue_scores);
  result.summary.length = detail::component_stats(length_scores);
  result.summary.mean_dialogue_f1 = result.summary.dialogue.mean;
  result.summary.repcol_rate =
      records.empty() ? 0.0
                      : static_cast<double>(collapsed_count) / static_cast<double>(records.size());
  return result;
}

inline std::vector<nlohmann::json> score_report_rows(const ScoreResult& result) {
  std::vector<nlohmann::json> rows;
  for (const auto& r : result.records) {
    nlohmann::json row{{"type", "record"},
                       {"video_id", r.video_id},
                       {"measured_length", r.measured_length},
                       {"r_length", r.r_length},
                       {"collapsed", r.collapsed},
                       {"total_present", r.total_present},
                       {"missing_components", r.missing_components},
                       {"errors", r.errors}};
    if (r.evidence) row["repetition_evidence"] = *r.evidence;
    if (r.checklist) {
      row["r_checklist"] = r.checklist->score;
      row["matched_keypoint_ids"] = r.checklist->matched_ids;
      if (r.checklist->vacuous_inventory) row["vacuous_inventory"] = true;
    }
    if (r.dialogue_result) {
      const auto& d = *r.dialogue_result;
      row["r_dialogue"] = d.score;
      row["dialogue_audit"] = {{"gen_len", d.gen_len},       {"gt_len", d.gt_len},
                               {"s_content", d.s_content},   {"s_speaker", d.s_speaker},
                               {"s_combined", d.s_combined}, {"precision", d.precision},
                               {"recall", d.recall},         {"alignment", d.alignment},
                               {"speaker_verdicts", d.speaker_verdicts}};
    }
    rows.push_back(std::move(row));
  }
  const auto stats_json = [](const ComponentStats& s) {
    return nlohmann::json{{"count", s.count}, {"mean", s.mean}, {"stddev", s.stddev}};
  };
  rows.push_back(nlohmann::json{{"type", "summary"},
                                {"records", result.summary.records},
                                {"errored_records", result.summary.errored_records},
                                {"checklist", stats_json(result.summary.checklist)},
                                {"dialogue", stats_json(result.summary.dialogue)},
                                {"length", stats_json(result.summary.length)},
                                {"mean_dialogue_f1", result.summary.mean_dialogue_f1},
                                {"repcol_rate", result.summary.repcol_rate}});
  return rows;
}

inline void write_score_report(const ScoreResult& result, const std::filesystem::path& path) {
  data::write_jsonl(path, score_report_rows(result));
}

}  // namespace avcap::eval
