#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "avcap/dialogue.hpp"
#include "avcap/errors.hpp"
#include "avcap/text_metrics.hpp"

namespace avcap::dialogue {

struct MatchedPair {
  std::size_t gen_index = 0;
  std::size_t gt_index = 0;
  double similarity = 0.0;
};

/// A monotone matching between a generated and a ground-truth dialogue
/// sequence. Indices are strictly increasing in both coordinates, every pair
/// similarity is at least the threshold, and content_score is their sum.
struct AlignmentResult {
  std::vector<MatchedPair> matched_pairs;
  double content_score = 0.0;
};

struct AlignOptions {
  double gamma = 0.6;  // minimum per-pair content similarity
  text::TextNormalization normalization = text::TextNormalization::none;
};

namespace detail {

inline void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ArgumentError("align: gamma must be in (0, 1]");
  }
}

inline std::vector<std::vector<double>> similarity_matrix(const DialogueSequence& gen,
                                                          const DialogueSequence& gt,
                                                          text::TextNormalization norm) {
  std::vector<std::vector<double>> sim(gen.size(), std::vector<double>(gt.size(), 0.0));
  for (std::size_t i = 0; i < gen.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      sim[i][j] = text::content_similarity(gen.units[i].content, gt.units[j].content, norm);
    }
  }
  return sim;
}

}  // namespace detail

/// Maximum-total-similarity monotone matching between two dialogue sequences.
///
/// Finds, via an LCS-style dynamic program, a set of index pairs strictly
/// increasing in both sequences such that every matched pair has content
/// similarity >= gamma and the sum of pair similarities is maximal. The table
///
///   F[i][j] = best total similarity over the first i generated and first j
///             ground-truth units
///
/// takes the max of skipping a generated unit, skipping a ground-truth unit,
/// and (when the pair clears the threshold) matching them. Traceback is
/// deterministic: the diagonal match is preferred, then the skip-generated
/// transition, then skip-ground-truth. Cell comparisons carry a 1e-12 slack
/// so platform-dependent rounding cannot flip the canonical matching.
inline AlignmentResult align(const DialogueSequence& gen, const DialogueSequence& gt,
                             const AlignOptions& opts) {
  detail::check_gamma(opts.gamma);
  const std::size_t n = gen.size();
  const std::size_t m = gt.size();
  const auto sim = detail::similarity_matrix(gen, gt, opts.normalization);

  std::vector<std::vector<double>> f(n + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double best = std::max(f[i - 1][j], f[i][j - 1]);
      const double s = sim[i - 1][j - 1];
      if (s >= opts.gamma) best = std::max(best, f[i - 1][j - 1] + s);
      f[i][j] = best;
    }
  }

  constexpr double kTieTol = 1e-12;
  AlignmentResult result;
  result.content_score = f[n][m];
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 && j > 0) {
    const double s = sim[i - 1][j - 1];
    if (s >= opts.gamma && f[i - 1][j - 1] + s >= f[i][j] - kTieTol) {
      result.matched_pairs.push_back({i - 1, j - 1, s});
      --i;
      --j;
    } else if (f[i - 1][j] >= f[i][j] - kTieTol) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(result.matched_pairs.begin(), result.matched_pairs.end());
  return result;
}

inline AlignmentResult align(const DialogueSequence& gen, const DialogueSequence& gt,
                             double gamma) {
  return align(gen, gt, AlignOptions{gamma, text::TextNormalization::none});
}

/// Exhaustive-enumeration reference for align(). Tries every monotone matching
/// whose pairs clear the threshold and keeps the best total similarity. Keeps
/// no DP state on purpose; it exists to validate align() on small instances.
inline AlignmentResult brute_force_align(const DialogueSequence& gen, const DialogueSequence& gt,
                                         const AlignOptions& opts) {
  detail::check_gamma(opts.gamma);
  constexpr std::size_t kMaxUnits = 8;
  if (gen.size() > kMaxUnits || gt.size() > kMaxUnits) {
    throw ArgumentError("brute_force_align: sequences longer than 8 units");
  }
  const std::size_t n = gen.size();
  const std::size_t m = gt.size();
  const auto sim = detail::similarity_matrix(gen, gt, opts.normalization);

  AlignmentResult best;
  std::vector<MatchedPair> current;

  const auto recurse = [&](auto&& self, std::size_t i0, std::size_t j0, double score) -> void {
    if (score > best.content_score) {
      best.content_score = score;
      best.matched_pairs = current;
    }
    for (std::size_t i = i0; i < n; ++i) {
      for (std::size_t j = j0; j < m; ++j) {
        const double s = sim[i][j];
        if (s < opts.gamma) continue;
        current.push_back({i, j, s});
        self(self, i + 1, j + 1, score + s);
        current.pop_back();
      }
    }
  };
  recurse(recurse, 0, 0, 0.0);
  return best;
}

inline AlignmentResult brute_force_align(const DialogueSequence& gen, const DialogueSequence& gt,
                                         double gamma) {
  return brute_force_align(gen, gt, AlignOptions{gamma, text::TextNormalization::none});
}

}  // namespace avcap::dialogue
