#pragma once

#include <random>
#include <span>

#include "avcap/errors.hpp"

namespace avcap {

// std::uniform_real_distribution / std::discrete_distribution are not pinned
// by the standard, so sampling goes through these helpers to keep runs
// bit-reproducible across platforms. mt19937_64 itself is fully specified.

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF categorical sample. probs must be non-negative; they are
/// normalized by their sum.
inline std::size_t sample_categorical(std::span<const double> probs, std::mt19937_64& rng) {
  if (probs.empty()) throw ArgumentError("sample_categorical: empty distribution");
  double total = 0.0;
  for (const double p : probs) {
    if (p < 0.0) throw ArgumentError("sample_categorical: negative probability");
    total += p;
  }
  if (total <= 0.0) throw ArgumentError("sample_categorical: zero-mass distribution");
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

}  // namespace avcap
