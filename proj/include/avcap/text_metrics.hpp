#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "avcap/errors.hpp"
#include "avcap/utf8.hpp"

namespace avcap::text {

enum class TokenizerMode {
  whitespace,               // maximal non-whitespace runs
  character,                // one token per code point
  external_count_callback,  // length supplied by a registered callback
};

enum class TextNormalization {
  none,
  lowercase_collapse_whitespace,  // ASCII lowercase + collapse whitespace runs, trim ends
};

/// How strings are turned into token counts. Counting under a fixed spec is
/// deterministic; the callback mode exists so a real model tokenizer can be
/// plugged in without this library depending on one.
struct TokenizerSpec {
  TokenizerMode mode = TokenizerMode::whitespace;
  TextNormalization normalization = TextNormalization::none;
  std::function<std::size_t(std::string_view)> external_counter;  // required in callback mode
};

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string normalize(std::string_view s, TextNormalization mode) {
  if (mode == TextNormalization::none) return std::string(s);
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (const char c : s) {
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

/// Classic unit-cost Levenshtein distance over code points.
/// Symmetric, satisfies the triangle inequality, zero iff equal.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  const std::vector<char32_t> ca = utf8::decode(a);
  const std::vector<char32_t> cb = utf8::decode(b);
  const std::size_t m = ca.size();
  const std::size_t n = cb.size();
  if (m == 0) return n;
  if (n == 0) return m;

  std::vector<std::size_t> prev(n + 1);
  std::vector<std::size_t> curr(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t cost = (ca[i - 1] == cb[j - 1]) ? 0 : 1;
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + cost});
    }
    std::swap(prev, curr);
  }
  return prev[n];
}

/// Normalized edit similarity: 1 - distance / max(code point lengths).
/// Both strings empty compares equal strings, so the result is 1.0.
inline double content_similarity(std::string_view a, std::string_view b) {
  const std::size_t max_len = std::max(utf8::length(a), utf8::length(b));
  if (max_len == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(max_len);
}

inline double content_similarity(std::string_view a, std::string_view b,
                                 TextNormalization norm) {
  if (norm == TextNormalization::none) return content_similarity(a, b);
  return content_similarity(normalize(a, norm), normalize(b, norm));
}

/// Token list under a spec. The callback mode only supplies counts, so token
/// identity (needed for n-gram work) falls back to whitespace splitting there.
inline std::vector<std::string> tokenize(std::string_view raw, const TokenizerSpec& spec) {
  const std::string s = normalize(raw, spec.normalization);
  std::vector<std::string> tokens;
  if (spec.mode == TokenizerMode::character) {
    std::size_t i = 0;
    while (i < s.size()) {
      std::size_t len = 1;
      const auto b0 = static_cast<unsigned char>(s[i]);
      if ((b0 & 0xE0) == 0xC0) len = 2;
      else if ((b0 & 0xF0) == 0xE0) len = 3;
      else if ((b0 & 0xF8) == 0xF0) len = 4;
      len = std::min(len, s.size() - i);
      tokens.emplace_back(s.substr(i, len));
      i += len;
    }
    return tokens;
  }
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_ascii_space(s[i])) ++i;
    if (i > start) tokens.emplace_back(s.substr(start, i - start));
  }
  return tokens;
}

inline std::size_t token_length(std::string_view s, const TokenizerSpec& spec) {
  switch (spec.mode) {
    case TokenizerMode::whitespace:
      return tokenize(s, spec).size();
    case TokenizerMode::character:
      return utf8::length(normalize(s, spec.normalization));
    case TokenizerMode::external_count_callback:
      if (!spec.external_counter) {
        throw ConfigError("token_length: external_count_callback mode with no callback registered");
      }
      return spec.external_counter(normalize(s, spec.normalization));
  }
  throw ConfigError("token_length: unknown tokenizer mode");
}

struct RepetitionConfig {
  std::size_t ngram_len = 10;  // tokens
  std::size_t min_repeats = 4;
};

struct RepetitionEvidence {
  std::string ngram;  // repeated tokens joined with single spaces
  std::size_t count = 0;
};

struct RepetitionReport {
  bool collapsed = false;
  std::optional<RepetitionEvidence> evidence;
};

/// True iff some contiguous token n-gram of length cfg.ngram_len occurs at
/// least cfg.min_repeats times (occurrences at every start position count,
/// including overlapping ones). Monotone under appending text.
inline RepetitionReport detect_repetition_collapse(std::string_view s, const TokenizerSpec& spec,
                                                   const RepetitionConfig& cfg) {
  if (cfg.ngram_len < 1) throw ArgumentError("detect_repetition_collapse: ngram_len must be >= 1");
  if (cfg.min_repeats < 2) throw ArgumentError("detect_repetition_collapse: min_repeats must be >= 2");

  const std::vector<std::string> tokens = tokenize(s, spec);
  RepetitionReport report;
  if (tokens.size() < cfg.ngram_len) return report;

  struct Entry {
    std::size_t count = 0;
    std::size_t first_pos = 0;
  };
  std::unordered_map<std::string, Entry> counts;
  const std::size_t last_start = tokens.size() - cfg.ngram_len;
  for (std::size_t pos = 0; pos <= last_start; ++pos) {
    std::string key;
    for (std::size_t k = 0; k < cfg.ngram_len; ++k) {
      if (k > 0) key.push_back('\x1f');
      key += tokens[pos + k];
    }
    auto [it, inserted] = counts.try_emplace(std::move(key));
    if (inserted) it->second.first_pos = pos;
    ++it->second.count;
  }

  // Highest count wins; ties break toward the earliest first occurrence.
  const Entry* best = nullptr;
  const std::string* best_key = nullptr;
  for (const auto& [key, entry] : counts) {
    if (entry.count < cfg.min_repeats) continue;
    if (!best || entry.count > best->count ||
        (entry.count == best->count && entry.first_pos < best->first_pos)) {
      best = &entry;
      best_key = &key;
    }
  }
  if (best) {
    std::string display = *best_key;
    std::replace(display.begin(), display.end(), '\x1f', ' ');
    report.collapsed = true;
    report.evidence = RepetitionEvidence{std::move(display), best->count};
  }
  return report;
}

}  // namespace avcap::text
