#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>

#include "avcap/alignment.hpp"

using namespace avcap;
using namespace avcap::dialogue;

namespace {

DialogueSequence seq(std::initializer_list<std::pair<const char*, const char*>> units,
                     Source source = Source::generated) {
  DialogueSequence s;
  s.source = source;
  for (const auto& [speaker, content] : units) s.units.push_back({speaker, content});
  return s;
}

std::string random_content(std::mt19937_64& rng, std::size_t max_len) {
  static constexpr char alphabet[] = "ab";
  const std::size_t len = rng() % (max_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % 2]);
  return s;
}

DialogueSequence random_sequence(std::mt19937_64& rng, std::size_t max_units,
                                 std::size_t max_len) {
  DialogueSequence s;
  const std::size_t n = rng() % (max_units + 1);
  for (std::size_t i = 0; i < n; ++i) {
    s.units.push_back({"spk" + std::to_string(rng() % 3), random_content(rng, max_len)});
  }
  return s;
}

}  // namespace

TEST_CASE("align on identical sequences matches every unit") {
  const auto gen = seq({{"A", "hello there"}, {"B", "how are you"}});
  const auto gt = seq({{"A", "hello there"}, {"B", "how are you"}}, Source::ground_truth);
  const auto result = align(gen, gt, 0.6);
  CHECK_THAT(result.content_score, Catch::Matchers::WithinAbs(2.0, 1e-12));
  REQUIRE(result.matched_pairs.size() == 2);
  CHECK(result.matched_pairs[0].gen_index == 0);
  CHECK(result.matched_pairs[0].gt_index == 0);
  CHECK(result.matched_pairs[0].similarity == 1.0);
  CHECK(result.matched_pairs[1].gen_index == 1);
  CHECK(result.matched_pairs[1].gt_index == 1);
}

TEST_CASE("align yields nothing below the threshold") {
  const auto result = align(seq({{"A", "abc"}}), seq({{"B", "xyz"}}), 0.6);
  CHECK(result.content_score == 0.0);
  CHECK(result.matched_pairs.empty());
}

TEST_CASE("align worked example: near-duplicate content") {
  const auto gen = seq({{"A", "hello world"}, {"A", "bye"}});
  const auto gt = seq({{"B", "hello word"}}, Source::ground_truth);
  const auto result = align(gen, gt, 0.6);
  CHECK_THAT(result.content_score, Catch::Matchers::WithinAbs(10.0 / 11.0, 1e-9));
  REQUIRE(result.matched_pairs.size() == 1);
  CHECK(result.matched_pairs[0].gen_index == 0);
  CHECK(result.matched_pairs[0].gt_index == 0);
  CHECK_THAT(result.matched_pairs[0].similarity, Catch::Matchers::WithinAbs(10.0 / 11.0, 1e-9));
}

TEST_CASE("align validates gamma") {
  const auto gen = seq({{"A", "x"}});
  CHECK_THROWS_AS(align(gen, gen, 0.0), ArgumentError);
  CHECK_THROWS_AS(align(gen, gen, -0.3), ArgumentError);
  CHECK_THROWS_AS(align(gen, gen, 1.5), ArgumentError);
  CHECK_NOTHROW(align(gen, gen, 1.0));
}

TEST_CASE("brute_force_align enforces its size limit") {
  DialogueSequence big;
  for (int i = 0; i < 9; ++i) big.units.push_back({"s", "c"});
  CHECK_THROWS_AS(brute_force_align(big, seq({{"A", "x"}}), 0.6), ArgumentError);
  CHECK(brute_force_align(seq({}), seq({{"A", "x"}}), 0.6).content_score == 0.0);
}

TEST_CASE("align equals brute force on the spec fixtures") {
  const auto cases = {
      std::pair{seq({{"A", "hello there"}, {"B", "how are you"}}),
                seq({{"A", "hello there"}, {"B", "how are you"}})},
      std::pair{seq({{"A", "abc"}}), seq({{"B", "xyz"}})},
      std::pair{seq({{"A", "hello world"}, {"A", "bye"}}), seq({{"B", "hello word"}})},
  };
  for (const auto& [gen, gt] : cases) {
    const auto dp = align(gen, gt, 0.6);
    const auto bf = brute_force_align(gen, gt, 0.6);
    CHECK_THAT(dp.content_score, Catch::Matchers::WithinAbs(bf.content_score, 1e-9));
  }
}

TEST_CASE("align equals brute force on random instances") {
  std::mt19937_64 rng(555);
  const double gammas[] = {0.3, 0.6, 0.9};
  for (int trial = 0; trial < 300; ++trial) {
    const auto gen = random_sequence(rng, 6, 8);
    const auto gt = random_sequence(rng, 6, 8);
    const double gamma = gammas[trial % 3];
    const auto dp = align(gen, gt, gamma);
    const auto bf = brute_force_align(gen, gt, gamma);
    INFO("trial " << trial << " gamma " << gamma);
    CHECK_THAT(dp.content_score, Catch::Matchers::WithinAbs(bf.content_score, 1e-9));
  }
}

TEST_CASE("alignment result invariants hold on random instances") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gen = random_sequence(rng, 6, 6);
    const auto gt = random_sequence(rng, 6, 6);
    const double gamma = 0.3 + 0.1 * static_cast<double>(rng() % 7);
    const auto result = align(gen, gt, gamma);

    double total = 0.0;
    std::size_t prev_gen = 0;
    std::size_t prev_gt = 0;
    bool first = true;
    for (const auto& p : result.matched_pairs) {
      if (!first) {
        CHECK(p.gen_index > prev_gen);
        CHECK(p.gt_index > prev_gt);
      }
      first = false;
      prev_gen = p.gen_index;
      prev_gt = p.gt_index;
      CHECK(p.similarity >= gamma);
      total += p.similarity;
    }
    CHECK_THAT(result.content_score, Catch::Matchers::WithinAbs(total, 1e-9));
    CHECK(result.content_score <=
          static_cast<double>(std::min(gen.size(), gt.size())) + 1e-12);

    // Symmetry under swapping the two sequences.
    CHECK_THAT(align(gt, gen, gamma).content_score,
               Catch::Matchers::WithinAbs(result.content_score, 1e-9));
  }
}

TEST_CASE("content_score is monotone in gamma and in appended units") {
  std::mt19937_64 rng(888);
  for (int trial = 0; trial < 100; ++trial) {
    const auto gen = random_sequence(rng, 5, 6);
    const auto gt = random_sequence(rng, 5, 6);
    const double lo = align(gen, gt, 0.3).content_score;
    const double mid = align(gen, gt, 0.6).content_score;
    const double hi = align(gen, gt, 0.9).content_score;
    CHECK(lo >= mid - 1e-12);
    CHECK(mid >= hi - 1e-12);

    auto extended = gen;
    extended.units.push_back({"extra", random_content(rng, 6)});
    CHECK(align(extended, gt, 0.6).content_score >= mid - 1e-12);
  }
}

TEST_CASE("traceback is deterministic among co-optimal matchings") {
  // Both ground-truth units match equally well; the diagonal-first rule keeps
  // the later one.
  const auto gen = seq({{"A", "same"}});
  const auto gt = seq({{"B", "same"}, {"C", "same"}}, Source::ground_truth);
  const auto first = align(gen, gt, 0.6);
  REQUIRE(first.matched_pairs.size() == 1);
  const auto second = align(gen, gt, 0.6);
  CHECK(first.matched_pairs[0].gt_index == second.matched_pairs[0].gt_index);
  CHECK(first.matched_pairs[0].gt_index == 1);
}

TEST_CASE("align honors content normalization option") {
  AlignOptions opts;
  opts.gamma = 0.9;
  const auto gen = seq({{"A", "Hello  World"}});
  const auto gt = seq({{"B", "hello world"}});
  CHECK(align(gen, gt, opts).matched_pairs.empty());
  opts.normalization = text::TextNormalization::lowercase_collapse_whitespace;
  CHECK(align(gen, gt, opts).matched_pairs.size() == 1);
}
