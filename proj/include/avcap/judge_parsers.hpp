#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "avcap/dialogue.hpp"
#include "avcap/errors.hpp"

// Strict parsers for the judge response formats. Each one either returns a
// validated value or throws with the raw response attached; the only
// tolerated deviation is the documented out-of-range-letter -> refusal rule
// for multiple choice answers.

namespace avcap::judge {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses the dialogue extraction format: one unit per line as
///   <speaker description>: "<content>"
/// The literal response "None." yields an empty sequence.
inline dialogue::DialogueSequence parse_dialogue_response(std::string_view raw) {
  dialogue::DialogueSequence seq;
  const std::string_view trimmed = detail::trim(raw);
  if (trimmed == "None.") return seq;
  if (trimmed.empty()) {
    throw ParseError("dialogue response: empty (expected units or the literal \"None.\")",
                     std::string(raw));
  }

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= trimmed.size()) {
    const std::size_t eol = trimmed.find('\n', pos);
    const std::string_view line =
        detail::trim(trimmed.substr(pos, eol == std::string_view::npos ? eol : eol - pos));
    pos = (eol == std::string_view::npos) ? trimmed.size() + 1 : eol + 1;
    ++line_no;
    if (line.empty()) continue;

    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("dialogue line " + std::to_string(line_no) + ": no speaker separator",
                       std::string(raw));
    }
    const std::string_view speaker = detail::trim(line.substr(0, colon));
    const std::string_view rest = detail::trim(line.substr(colon + 1));
    if (speaker.empty()) {
      throw ParseError("dialogue line " + std::to_string(line_no) + ": empty speaker",
                       std::string(raw));
    }
    if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"') {
      throw ParseError("dialogue line " + std::to_string(line_no) + ": content not quoted",
                       std::string(raw));
    }
    seq.units.push_back(
        {std::string(speaker), std::string(rest.substr(1, rest.size() - 2))});
  }
  return seq;
}

/// Parses a Python-style list-of-strings literal: ["a", "b", ...].
/// Accepts single or double quotes and simple backslash escapes.
inline std::vector<std::string> parse_string_list(std::string_view raw) {
  const std::string_view s = detail::trim(raw);
  const auto fail = [&](const std::string& why) -> void {
    throw ParseError("string list: " + why, std::string(raw));
  };
  if (s.empty() || s.front() != '[') fail("expected '['");
  std::vector<std::string> out;
  std::size_t i = 1;
  const auto skip_ws = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  skip_ws();
  bool expect_item = true;
  while (true) {
    skip_ws();
    if (i >= s.size()) fail("unterminated list");
    if (s[i] == ']') {
      ++i;
      break;
    }
    if (!expect_item) fail("expected ',' or ']'");
    const char quote = s[i];
    if (quote != '"' && quote != '\'') fail("expected quoted string");
    ++i;
    std::string item;
    bool closed = false;
    while (i < s.size()) {
      const char c = s[i++];
      if (c == '\\') {
        if (i >= s.size()) fail("dangling escape");
        const char esc = s[i++];
        switch (esc) {
          case 'n': item.push_back('\n'); break;
          case 't': item.push_back('\t'); break;
          default: item.push_back(esc); break;
        }
        continue;
      }
      if (c == quote) {
        closed = true;
        break;
      }
      item.push_back(c);
    }
    if (!closed) fail("unterminated string");
    out.push_back(std::move(item));
    skip_ws();
    if (i < s.size() && s[i] == ',') {
      ++i;
      expect_item = true;
    } else {
      expect_item = false;
    }
  }
  skip_ws();
  if (i != s.size()) fail("trailing content after ']'");
  return out;
}

struct KeypointVerdictResponse {
  std::size_t count = 0;
  std::vector<std::string> mentioned;
};

/// Parses the keypoint-judging dictionary:
///   {"Count of correctly mentioned keypoints": n, "Correctly mentioned keypoints": [...]}
/// and validates that the reported count matches the list length.
inline KeypointVerdictResponse parse_keypoint_verdicts(std::string_view raw) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("keypoint verdicts: invalid JSON: ") + e.what(),
                     std::string(raw));
  }
  static constexpr const char* kCountKey = "Count of correctly mentioned keypoints";
  static constexpr const char* kListKey = "Correctly mentioned keypoints";
  if (!doc.is_object() || !doc.contains(kCountKey) || !doc.contains(kListKey)) {
    throw ParseError("keypoint verdicts: missing required keys", std::string(raw));
  }
  if (!doc[kCountKey].is_number_integer() || doc[kCountKey].get<long long>() < 0) {
    throw ParseError("keypoint verdicts: count is not a non-negative integer", std::string(raw));
  }
  if (!doc[kListKey].is_array()) {
    throw ParseError("keypoint verdicts: list is not an array", std::string(raw));
  }
  KeypointVerdictResponse out;
  out.count = doc[kCountKey].get<std::size_t>();
  for (const auto& item : doc[kListKey]) {
    if (!item.is_string()) {
      throw ParseError("keypoint verdicts: list holds a non-string", std::string(raw));
    }
    out.mentioned.push_back(item.get<std::string>());
  }
  if (out.count != out.mentioned.size()) {
    throw ValidationError("keypoint verdicts: reported count " + std::to_string(out.count) +
                              " != list length " + std::to_string(out.mentioned.size()),
                          std::string(raw));
  }
  return out;
}

/// Parses a space-separated Yes/No sequence with exactly `expected` verdicts.
inline std::vector<bool> parse_yes_no_sequence(std::string_view raw, std::size_t expected) {
  std::vector<bool> out;
  const std::string_view s = detail::trim(raw);
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) break;
    const std::string_view token = s.substr(start, i - start);
    if (token == "Yes") {
      out.push_back(true);
    } else if (token == "No") {
      out.push_back(false);
    } else {
      throw ParseError("speaker verdicts: unknown token '" + std::string(token) + "'",
                       std::string(raw));
    }
  }
  if (out.size() != expected) {
    throw ParseError("speaker verdicts: expected " + std::to_string(expected) + " verdicts, got " +
                         std::to_string(out.size()),
                     std::string(raw));
  }
  return out;
}

/// A multiple-choice answer. `letter` is set for a valid in-range choice;
/// otherwise the answer counts as a refusal. `format_warning` marks the
/// lenient path where a malformed or out-of-range response was mapped to a
/// refusal instead of failing the run.
struct McqAnswer {
  std::optional<char> letter;
  bool refused = false;
  bool format_warning = false;
};

inline McqAnswer parse_mcq_answer(std::string_view raw, std::size_t n_choices) {
  if (n_choices < 2 || n_choices > 26) {
    throw ArgumentError("parse_mcq_answer: choice count must be in [2, 26]");
  }
  const std::string_view s = detail::trim(raw);
  if (s == "N/A") return {std::nullopt, true, false};
  if (s.size() == 1 && s[0] >= 'A' && s[0] < static_cast<char>('A' + n_choices)) {
    return {s[0], false, false};
  }
  return {std::nullopt, true, true};
}

/// Parses a completeness score: a bare integer in [1, 5].
inline int parse_completeness_score(std::string_view raw) {
  const std::string_view s = detail::trim(raw);
  if (s.empty() || s.size() > 2) {
    throw ParseError("completeness score: expected an integer in [1,5]", std::string(raw));
  }
  for (const char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ParseError("completeness score: not an integer", std::string(raw));
    }
  }
  const int value = std::stoi(std::string(s));
  if (value < 1 || value > 5) {
    throw ParseError("completeness score: out of range [1,5]", std::string(raw));
  }
  return value;
}

}  // namespace avcap::judge
