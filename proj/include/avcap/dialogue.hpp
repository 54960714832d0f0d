#pragma once

#include <string>
#include <vector>

namespace avcap::dialogue {

enum class Source { generated, ground_truth };

/// One spoken turn: a free-text speaker description plus the spoken content.
/// Content may be empty only when the speaker is non-empty.
struct DialogueUnit {
  std::string speaker;
  std::string content;

  friend bool operator==(const DialogueUnit&, const DialogueUnit&) = default;
};

/// Ordered dialogue turns extracted from a caption.
struct DialogueSequence {
  std::vector<DialogueUnit> units;
  Source source = Source::generated;

  std::size_t size() const noexcept { return units.size(); }
  bool empty() const noexcept { return units.empty(); }
};

}  // namespace avcap::dialogue
