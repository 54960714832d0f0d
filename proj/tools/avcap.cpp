// avcap: batch CLI over the caption reward, alignment, evaluation, curation,
// and GRPO toy-training machinery. Subcommands are thin wrappers over the
// library; anything a subcommand prints can be reproduced by the
// corresponding library call with the same inputs.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avcap/avcap.hpp"

namespace {

using avcap::cli::AppConfig;

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> mock_rules;
  std::optional<std::string> endpoint_url;
  std::optional<std::string> model_name;
  std::optional<std::string> prompts_dir;
  std::optional<std::string> cache_dir;
  std::optional<int> jobs;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file with defaults");
  cmd->add_option("--mock-rules", flags.mock_rules, "mock judge rule file (selects the mock judge)");
  cmd->add_option("--endpoint", flags.endpoint_url, "judge endpoint URL (chat-completion style)");
  cmd->add_option("--model", flags.model_name, "judge model name");
  cmd->add_option("--prompts-dir", flags.prompts_dir, "directory holding prompt templates");
  cmd->add_option("--cache-dir", flags.cache_dir, "judge response cache directory");
  cmd->add_option("--jobs", flags.jobs, "parallel worker bound");
}

AppConfig resolve_config(const CommonFlags& flags) {
  AppConfig cfg;
  if (flags.config_path) cfg = avcap::cli::load_config(*flags.config_path);
  if (flags.mock_rules) cfg.mock_rules = *flags.mock_rules;
  if (flags.endpoint_url) cfg.endpoint.base_url = *flags.endpoint_url;
  if (flags.model_name) cfg.endpoint.model_name = *flags.model_name;
  if (flags.prompts_dir) cfg.prompts_dir = *flags.prompts_dir;
  if (flags.cache_dir) cfg.endpoint.cache_dir = *flags.cache_dir;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  return cfg;
}

std::unique_ptr<avcap::judge::JudgeGateway> make_gateway(const AppConfig& cfg) {
  std::shared_ptr<avcap::judge::JudgeTransport> transport;
  auto endpoint = cfg.endpoint;
  if (cfg.mock_rules) {
    transport = std::make_shared<avcap::judge::MockTransport>(
        avcap::judge::MockJudgeRules::load(*cfg.mock_rules));
    if (endpoint.model_name.empty()) endpoint.model_name = "mock";
  } else if (!endpoint.base_url.empty()) {
    transport = std::make_shared<avcap::judge::HttpTransport>(endpoint);
  } else {
    throw avcap::ConfigError(
        "no judge configured: pass --mock-rules or --endpoint (or set them in the config)");
  }
  auto prompts = std::make_shared<avcap::judge::PromptLibrary>(cfg.prompts_dir);
  return std::make_unique<avcap::judge::JudgeGateway>(endpoint, std::move(transport),
                                                      std::move(prompts));
}

int run_score(const AppConfig& cfg, const std::string& input, const std::string& output) {
  const auto records = avcap::data::load_captions(input);
  avcap::eval::ScoreConfig score_cfg;
  score_cfg.gamma = cfg.gamma;
  score_cfg.length = cfg.length_config();
  score_cfg.repetition = cfg.repetition;
  score_cfg.jobs = cfg.jobs;

  bool needs_judge = false;
  for (const auto& rec : records) {
    if ((rec.keypoints && !rec.keypoints->empty()) || rec.gt_dialogue) needs_judge = true;
  }
  std::unique_ptr<avcap::judge::JudgeGateway> gateway;
  if (needs_judge) {
    gateway = make_gateway(cfg);
  } else {
    // No record carries keypoints or ground-truth dialogue, so no judge call
    // can happen; a throwing placeholder keeps the wiring honest.
    struct NoJudge : avcap::judge::JudgeTransport {
      std::string send(const avcap::judge::JudgeRequest&) override {
        throw avcap::JudgeError("no judge configured");
      }
    };
    auto endpoint = cfg.endpoint;
    endpoint.model_name = "none";
    auto prompts_dir = std::filesystem::temp_directory_path();
    gateway = std::make_unique<avcap::judge::JudgeGateway>(
        endpoint, std::make_shared<NoJudge>(),
        std::make_shared<avcap::judge::PromptLibrary>(prompts_dir));
  }

  const auto result = avcap::eval::score_dataset(records, *gateway, score_cfg);
  avcap::eval::write_score_report(result, output);
  std::fprintf(stdout, "scored %zu records -> %s (mean Dlg. F1 %.6g, RepCol rate %.6g)\n",
               result.records.size(), output.c_str(), result.summary.mean_dialogue_f1,
               result.summary.repcol_rate);
  return 0;
}

int run_align(const AppConfig& cfg, const std::string& gen_path, const std::string& gt_path) {
  const auto gen = avcap::data::load_dialogue_file(gen_path, avcap::dialogue::Source::generated);
  const auto gt = avcap::data::load_dialogue_file(gt_path, avcap::dialogue::Source::ground_truth);
  avcap::dialogue::AlignOptions opts;
  opts.gamma = cfg.gamma;
  opts.normalization = cfg.normalize_content
                           ? avcap::text::TextNormalization::lowercase_collapse_whitespace
                           : avcap::text::TextNormalization::none;
  const auto result = avcap::dialogue::align(gen, gt, opts);
  std::fprintf(stdout, "content_score %.9g\n", result.content_score);
  std::fprintf(stdout, "matched_pairs %zu\n", result.matched_pairs.size());
  for (const auto& p : result.matched_pairs) {
    std::fprintf(stdout, "%zu %zu %.9g\n", p.gen_index, p.gt_index, p.similarity);
  }
  return 0;
}

int run_extract_dialogue(const AppConfig& cfg, const std::string& input,
                         const std::string& output) {
  const auto records = avcap::data::load_captions(input);
  auto gateway = make_gateway(cfg);
  std::vector<nlohmann::json> rows(records.size());
  avcap::parallel_for(records.size(), cfg.jobs, [&](std::size_t i) {
    const auto seq = gateway->extract_dialogues(records[i].caption);
    rows[i] = {{"video_id", records[i].video_id}, {"dialogue", seq}};
  });
  avcap::data::write_jsonl(output, rows);
  std::fprintf(stdout, "extracted dialogues for %zu records -> %s\n", records.size(),
               output.c_str());
  return 0;
}

int run_grpo_demo(const AppConfig& cfg, std::size_t steps, std::uint64_t seed,
                  const std::optional<std::string>& trace_path) {
  // Two-arm bandit: reward 1.0 on the designated action, 0.0 otherwise.
  avcap::grpo::ToyCategoricalPolicy policy;
  policy.logits["bandit"] = {0.0, 0.0};
  constexpr int kTargetAction = 1;
  const auto reward_fn = [](const std::string&, int action) {
    return action == kTargetAction ? 1.0 : 0.0;
  };
  const auto result = avcap::grpo::train_toy(policy, reward_fn, steps, cfg.grpo, seed);
  if (trace_path) avcap::grpo::write_reward_trace(result.trace, *trace_path);
  const double final_reward = result.trace.empty() ? 0.0 : result.trace.back().mean_reward;
  std::fprintf(stdout, "steps %zu seed %llu final_mean_reward %.9g\n", steps,
               static_cast<unsigned long long>(seed), final_reward);
  return 0;
}

int run_eval_qa(const AppConfig& cfg, const std::string& captions_path,
                const std::string& items_path, const std::string& output,
                bool exclude_missing) {
  const auto captions = avcap::data::load_captions(captions_path);
  const auto items = avcap::data::load_qa_items(items_path);
  auto gateway = make_gateway(cfg);
  avcap::eval::QAConfig qa_cfg;
  qa_cfg.count_missing_caption_as_incorrect = !exclude_missing;
  qa_cfg.jobs = cfg.jobs;
  const auto report = avcap::eval::run_qa_eval(captions, items, *gateway, qa_cfg);
  avcap::eval::write_report(report, output);
  std::fprintf(stdout, "evaluated %zu items -> %s (accuracy %.6g, refusal rate %.6g)\n",
               report.verdicts.size(), output.c_str(), report.accuracy, report.refusal_rate);
  return 0;
}

int run_curate(const AppConfig& cfg, const std::string& input, const std::string& output) {
  const auto samples = avcap::curation::load_curation_samples(input);
  auto gateway = make_gateway(cfg);
  avcap::curation::GateConfig gate_cfg;
  gate_cfg.min_tokens = cfg.min_tokens;
  gate_cfg.max_tokens = cfg.max_tokens;
  gate_cfg.tokenizer = cfg.tokenizer;
  gate_cfg.repetition = cfg.repetition;
  gate_cfg.min_completeness = cfg.min_completeness;
  const auto outcomes = avcap::curation::curate(samples, *gateway, gate_cfg, cfg.jobs);
  avcap::data::write_jsonl(output, avcap::curation::curate_report_rows(outcomes));
  std::size_t kept = 0;
  for (const auto& o : outcomes) {
    if (o.decision.status == avcap::curation::GateStatus::keep) ++kept;
  }
  std::fprintf(stdout, "curated %zu samples -> %s (kept %zu)\n", outcomes.size(), output.c_str(),
               kept);
  return 0;
}

int run_repcol(const AppConfig& cfg, const std::string& input, const std::string& output) {
  const auto records = avcap::data::load_captions(input);
  std::vector<nlohmann::json> rows;
  std::size_t collapsed_count = 0;
  for (const auto& rec : records) {
    const auto report =
        avcap::text::detect_repetition_collapse(rec.caption, cfg.tokenizer, cfg.repetition);
    nlohmann::json row{{"video_id", rec.video_id}, {"collapsed", report.collapsed}};
    if (report.evidence) row["evidence"] = *report.evidence;
    if (report.collapsed) ++collapsed_count;
    rows.push_back(std::move(row));
  }
  const double rate =
      records.empty() ? 0.0 : static_cast<double>(collapsed_count) / static_cast<double>(records.size());
  rows.push_back(nlohmann::json{
      {"type", "summary"}, {"records", records.size()}, {"collapsed", collapsed_count},
      {"repcol_rate", rate}});
  avcap::data::write_jsonl(output, rows);
  std::fprintf(stdout, "repcol rate %.6g over %zu records -> %s\n", rate, records.size(),
               output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"audiovisual caption reward and evaluation toolkit"};
  app.require_subcommand(1);

  std::function<int()> action;

  // score
  {
    auto* cmd = app.add_subcommand("score", "score a caption dataset with the reward functions");
    auto flags = std::make_shared<CommonFlags>();
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    auto gamma = std::make_shared<std::optional<double>>();
    auto tau1 = std::make_shared<std::optional<std::size_t>>();
    auto tau2 = std::make_shared<std::optional<std::size_t>>();
    add_common_flags(cmd, *flags);
    cmd->add_option("input", *input, "captions JSONL")->required();
    cmd->add_option("-o,--output", *output, "report JSONL")->required();
    cmd->add_option("--gamma", *gamma, "alignment similarity threshold");
    cmd->add_option("--tau1", *tau1, "length reward lower threshold (tokens)");
    cmd->add_option("--tau2", *tau2, "length reward upper threshold (tokens)");
    cmd->callback([=, &action] {
      action = [=] {
        AppConfig cfg = resolve_config(*flags);
        if (*gamma) cfg.gamma = **gamma;
        if (*tau1) cfg.tau1 = **tau1;
        if (*tau2) cfg.tau2 = **tau2;
        return run_score(cfg, *input, *output);
      };
    });
  }

  // align
  {
    auto* cmd = app.add_subcommand("align", "align two dialogue files and print the result");
    auto flags = std::make_shared<CommonFlags>();
    auto gen = std::make_shared<std::string>();
    auto gt = std::make_shared<std::string>();
    auto gamma = std::make_shared<std::optional<double>>();
    auto normalize = std::make_shared<bool>(false);
    add_common_flags(cmd, *flags);
    cmd->add_option("gen", *gen, "generated dialogue JSONL (one unit per line)")->required();
    cmd->add_option("gt", *gt, "ground-truth dialogue JSONL")->required();
    cmd->add_option("--gamma", *gamma, "similarity threshold");
    cmd->add_flag("--normalize", *normalize, "lowercase + collapse whitespace before similarity");
    cmd->callback([=, &action] {
      action = [=] {
        AppConfig cfg = resolve_config(*flags);
        if (*gamma) cfg.gamma = **gamma;
        if (*normalize) cfg.normalize_content = true;
        return run_align(cfg, *gen, *gt);
      };
    });
  }

  // extract-dialogue
  {
    auto* cmd = app.add_subcommand("extract-dialogue", "extract structured dialogue from captions");
    auto flags = std::make_shared<CommonFlags>();
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    add_common_flags(cmd, *flags);
    cmd->add_option("input", *input, "captions JSONL")->required();
    cmd->add_option("-o,--output", *output, "dialogue JSONL")->required();
    cmd->callback([=, &action] {
      action = [=] { return run_extract_dialogue(resolve_config(*flags), *input, *output); };
    });
  }

  // grpo-demo
  {
    auto* cmd = app.add_subcommand("grpo-demo", "seeded toy GRPO training demo (2-arm bandit)");
    auto flags = std::make_shared<CommonFlags>();
    auto steps = std::make_shared<std::size_t>(200);
    auto seed = std::make_shared<std::uint64_t>(7);
    auto trace = std::make_shared<std::optional<std::string>>();
    auto beta = std::make_shared<std::optional<double>>();
    auto clip_eps = std::make_shared<std::optional<double>>();
    auto group_size = std::make_shared<std::optional<std::size_t>>();
    auto lr = std::make_shared<std::optional<double>>();
    add_common_flags(cmd, *flags);
    cmd->add_option("--steps", *steps, "training steps");
    cmd->add_option("--seed", *seed, "rng seed");
    cmd->add_option("--trace", *trace, "write the reward trace to this file");
    cmd->add_option("--beta", *beta, "KL coefficient");
    cmd->add_option("--clip-eps", *clip_eps, "surrogate clip width");
    cmd->add_option("--group-size", *group_size, "responses per group");
    cmd->add_option("--lr", *lr, "learning rate");
    cmd->callback([=, &action] {
      action = [=] {
        AppConfig cfg = resolve_config(*flags);
        if (*beta) cfg.grpo.kl_coeff = **beta;
        if (*clip_eps) cfg.grpo.clip_eps = **clip_eps;
        if (*group_size) cfg.grpo.group_size = **group_size;
        if (*lr) cfg.grpo.learning_rate = **lr;
        return run_grpo_demo(cfg, *steps, *seed, *trace);
      };
    });
  }

  // eval-qa
  {
    auto* cmd = app.add_subcommand("eval-qa", "QA-based caption evaluation");
    auto flags = std::make_shared<CommonFlags>();
    auto captions = std::make_shared<std::string>();
    auto items = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    auto exclude_missing = std::make_shared<bool>(false);
    add_common_flags(cmd, *flags);
    cmd->add_option("--captions", *captions, "captions JSONL")->required();
    cmd->add_option("--items", *items, "QA items JSONL")->required();
    cmd->add_option("-o,--output", *output, "report JSONL")->required();
    cmd->add_flag("--exclude-missing", *exclude_missing,
                  "exclude items with missing captions from the accuracy denominator");
    cmd->callback([=, &action] {
      action = [=] {
        return run_eval_qa(resolve_config(*flags), *captions, *items, *output, *exclude_missing);
      };
    });
  }

  // curate
  {
    auto* cmd = app.add_subcommand("curate", "fuse modality captions and run the quality gate");
    auto flags = std::make_shared<CommonFlags>();
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    auto min_tokens = std::make_shared<std::optional<std::size_t>>();
    auto max_tokens = std::make_shared<std::optional<std::size_t>>();
    auto min_completeness = std::make_shared<std::optional<int>>();
    add_common_flags(cmd, *flags);
    cmd->add_option("input", *input, "curation samples JSONL")->required();
    cmd->add_option("-o,--output", *output, "decisions JSONL")->required();
    cmd->add_option("--min-tokens", *min_tokens, "minimum fused caption length");
    cmd->add_option("--max-tokens", *max_tokens, "maximum fused caption length");
    cmd->add_option("--min-completeness", *min_completeness, "minimum completeness score to keep");
    cmd->callback([=, &action] {
      action = [=] {
        AppConfig cfg = resolve_config(*flags);
        if (*min_tokens) cfg.min_tokens = **min_tokens;
        if (*max_tokens) cfg.max_tokens = **max_tokens;
        if (*min_completeness) cfg.min_completeness = **min_completeness;
        return run_curate(cfg, *input, *output);
      };
    });
  }

  // repcol
  {
    auto* cmd = app.add_subcommand("repcol", "repetition collapse detection over a caption file");
    auto flags = std::make_shared<CommonFlags>();
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    auto ngram_len = std::make_shared<std::optional<std::size_t>>();
    auto min_repeats = std::make_shared<std::optional<std::size_t>>();
    add_common_flags(cmd, *flags);
    cmd->add_option("input", *input, "captions JSONL")->required();
    cmd->add_option("-o,--output", *output, "report JSONL")->required();
    cmd->add_option("--ngram-len", *ngram_len, "n-gram length in tokens");
    cmd->add_option("--min-repeats", *min_repeats, "occurrences needed to flag collapse");
    cmd->callback([=, &action] {
      action = [=] {
        AppConfig cfg = resolve_config(*flags);
        if (*ngram_len) cfg.repetition.ngram_len = **ngram_len;
        if (*min_repeats) cfg.repetition.min_repeats = **min_repeats;
        return run_repcol(cfg, *input, *output);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return action ? action() : 1;
  } catch (const avcap::JudgeError& e) {
    std::cerr << "judge error: " << e.what() << '\n';
    return 2;
  } catch (const avcap::ParseError& e) {
    std::cerr << "judge response error: " << e.what() << '\n';
    return 2;
  } catch (const avcap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
