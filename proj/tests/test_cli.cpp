#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "avcap/alignment.hpp"
#include "avcap/datasets.hpp"

// Thin-wrapper checks: every subcommand's observable result must equal the
// corresponding library call, and mock-judge runs must be byte-reproducible.

using namespace avcap;

namespace {

std::filesystem::path repo_dir() { return AVCAP_REPO_DIR; }
std::filesystem::path fixture(const char* name) { return repo_dir() / "tests" / "fixtures" / name; }
std::string cli() { return AVCAP_CLI_PATH; }

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

RunResult run(const std::string& args) {
  const std::string command = cli() + " " + args + " 2>/dev/null";
  std::array<char, 4096> buffer{};
  RunResult result;
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t n = 0;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), n);
  }
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::filesystem::path temp_path(const char* tag) {
  static std::atomic<int> seq{0};
  return std::filesystem::temp_directory_path() /
         ("avcap_cli_" + std::string(tag) + "_" + std::to_string(::getpid()) + "_" +
          std::to_string(seq.fetch_add(1)));
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string judge_flags() {
  return "--mock-rules " + fixture("mock_rules.json").string() + " --prompts-dir " +
         (repo_dir() / "prompts").string();
}

}  // namespace

TEST_CASE("cli align matches the library call") {
  const auto gen_path = temp_path("gen");
  const auto gt_path = temp_path("gt");
  {
    std::ofstream gen(gen_path);
    gen << R"({"speaker": "A", "content": "hello world"})" << "\n";
    gen << R"({"speaker": "A", "content": "bye"})" << "\n";
    std::ofstream gt(gt_path);
    gt << R"({"speaker": "B", "content": "hello word"})" << "\n";
  }
  const auto result = run("align --gamma 0.6 " + gen_path.string() + " " + gt_path.string());
  REQUIRE(result.exit_code == 0);

  std::istringstream out(result.output);
  std::string key;
  double score = -1.0;
  out >> key >> score;
  CHECK(key == "content_score");
  std::size_t pairs = 0;
  out >> key >> pairs;
  CHECK(key == "matched_pairs");
  std::size_t gi = 99, ti = 99;
  double sim = 0.0;
  out >> gi >> ti >> sim;

  const auto gen = data::load_dialogue_file(gen_path, dialogue::Source::generated);
  const auto gt = data::load_dialogue_file(gt_path, dialogue::Source::ground_truth);
  const auto expected = dialogue::align(gen, gt, 0.6);
  CHECK_THAT(score, Catch::Matchers::WithinAbs(expected.content_score, 1e-9));
  REQUIRE(pairs == expected.matched_pairs.size());
  CHECK(gi == expected.matched_pairs[0].gen_index);
  CHECK(ti == expected.matched_pairs[0].gt_index);
  CHECK_THAT(sim, Catch::Matchers::WithinAbs(expected.matched_pairs[0].similarity, 1e-9));

  std::filesystem::remove(gen_path);
  std::filesystem::remove(gt_path);
}

TEST_CASE("cli score output is byte-identical across runs") {
  const auto out1 = temp_path("score1");
  const auto out2 = temp_path("score2");
  const std::string base = "score " + fixture("captions_5.jsonl").string() + " " + judge_flags();
  REQUIRE(run(base + " -o " + out1.string()).exit_code == 0);
  const auto r2 = run(base + " -o " + out2.string());
  REQUIRE(r2.exit_code == 0);
  CHECK(read_bytes(out1) == read_bytes(out2));
  std::filesystem::remove(out1);
  std::filesystem::remove(out2);
}

TEST_CASE("cli eval-qa output is byte-identical across runs") {
  const auto out1 = temp_path("qa1");
  const auto out2 = temp_path("qa2");
  const std::string base = "eval-qa --captions " + fixture("captions_5.jsonl").string() +
                           " --items " + fixture("qa_items.jsonl").string() + " " + judge_flags();
  REQUIRE(run(base + " -o " + out1.string()).exit_code == 0);
  REQUIRE(run(base + " -o " + out2.string()).exit_code == 0);
  const auto bytes = read_bytes(out1);
  CHECK(bytes == read_bytes(out2));
  CHECK(bytes.find("\"accuracy\":0.5") != std::string::npos);
  std::filesystem::remove(out1);
  std::filesystem::remove(out2);
}

TEST_CASE("cli repcol reports the collapse rate") {
  const auto out = temp_path("repcol");
  const auto result =
      run("repcol " + fixture("captions_collapse.jsonl").string() + " -o " + out.string());
  REQUIRE(result.exit_code == 0);
  const auto rows = data::load_jsonl(out);
  REQUIRE(rows.size() == 4);  // 3 records + summary
  CHECK(rows[1].value["collapsed"] == true);
  CHECK(rows[3].value["repcol_rate"].get<double>() == Catch::Approx(1.0 / 3.0));
  std::filesystem::remove(out);
}

TEST_CASE("cli grpo-demo converges on the bandit fixture") {
  const auto trace = temp_path("trace");
  const auto result = run("grpo-demo --steps 200 --seed 7 --trace " + trace.string());
  REQUIRE(result.exit_code == 0);
  const auto pos = result.output.find("final_mean_reward ");
  REQUIRE(pos != std::string::npos);
  const double final_reward = std::stod(result.output.substr(pos + 18));
  CHECK(final_reward > 0.9);
  // Trace file: header + one row per step.
  std::ifstream in(trace);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step\tmean_reward\tobjective\tkl");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 200);
  std::filesystem::remove(trace);
}

TEST_CASE("cli curate applies the completeness gate") {
  const auto out = temp_path("curate");
  const auto result = run("curate " + fixture("curation_samples.jsonl").string() + " " +
                          judge_flags() + " -o " + out.string());
  REQUIRE(result.exit_code == 0);
  const auto rows = data::load_jsonl(out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].value["decision"] == "reject");
  CHECK(rows[1].value["decision"] == "keep");
  CHECK(rows[2].value["decision"] == "keep");
  CHECK(rows[3].value["decision"] == "reject");
  CHECK(rows[3].value["reasons"].size() == 3);
  CHECK(rows[4].value["decision"] == "keep");
  std::filesystem::remove(out);
}

TEST_CASE("cli extract-dialogue writes structured dialogue") {
  const auto out = temp_path("extract");
  const auto result = run("extract-dialogue " + fixture("captions_5.jsonl").string() + " " +
                          judge_flags() + " -o " + out.string());
  // captions_5 includes vid_b/vid_d with no canned dialogue: judge failure.
  CHECK(result.exit_code == 2);

  // A file restricted to known captions succeeds.
  const auto small = temp_path("extract_in");
  {
    const auto records = data::load_captions(fixture("captions_5.jsonl"));
    std::ofstream o(small);
    o << nlohmann::json{{"video_id", records[0].video_id}, {"caption", records[0].caption}}.dump()
      << "\n";
  }
  const auto ok = run("extract-dialogue " + small.string() + " " + judge_flags() + " -o " +
                      out.string());
  REQUIRE(ok.exit_code == 0);
  const auto rows = data::load_jsonl(out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].value["dialogue"][0]["speaker"] == "a man in a red shirt");
  std::filesystem::remove(out);
  std::filesystem::remove(small);
}

TEST_CASE("cli exit codes distinguish validation from judge failures") {
  // Missing input file: validation error.
  CHECK(run("score /nonexistent/input.jsonl -o /tmp/avcap_out.jsonl " + judge_flags()).exit_code ==
        1);
  // Unknown flag: validation error.
  CHECK(run("align --nope a b").exit_code == 1);
  // Mock rule missing: judge failure.
  const auto missing_rules = temp_path("rules");
  {
    std::ofstream o(missing_rules);
    o << "{}\n";
  }
  const auto out = temp_path("qa_out");
  const auto result = run("eval-qa --captions " + fixture("captions_5.jsonl").string() +
                          " --items " + fixture("qa_items.jsonl").string() + " --mock-rules " +
                          missing_rules.string() + " --prompts-dir " +
                          (repo_dir() / "prompts").string() + " -o " + out.string());
  CHECK(result.exit_code == 2);
  std::filesystem::remove(missing_rules);
}

TEST_CASE("cli honors a config file with flag overrides") {
  const auto out = temp_path("cfg_out");
  const auto result = run("repcol " + fixture("captions_collapse.jsonl").string() + " --config " +
                          fixture("config.json").string() + " --min-repeats 6 -o " + out.string());
  REQUIRE(result.exit_code == 0);
  // min_repeats 6 beats the config's 4: the 5x phrase no longer collapses.
  const auto rows = data::load_jsonl(out);
  CHECK(rows[1].value["collapsed"] == false);
  CHECK(rows[3].value["repcol_rate"].get<double>() == 0.0);
  std::filesystem::remove(out);
}
