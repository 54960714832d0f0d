#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "avcap/errors.hpp"

namespace avcap::data {

struct JsonlRecord {
  std::size_t line_no = 0;  // 1-based
  nlohmann::json value;
};

/// Reads a JSONL file: one JSON object per line, blank lines skipped.
/// Invalid lines raise SchemaError naming the file and line.
inline std::vector<JsonlRecord> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::vector<JsonlRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (const char c : line) {
      if (c != ' ' && c != '\t') {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    try {
      records.push_back({line_no, nlohmann::json::parse(line)});
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

/// Writes one compact JSON document per line. nlohmann::json keeps object
/// keys sorted, which makes outputs byte-stable across runs.
inline void write_jsonl(const std::filesystem::path& path,
                        const std::vector<nlohmann::json>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write " + path.string());
  for (const auto& row : rows) out << row.dump() << '\n';
}

inline SchemaError schema_error(const std::filesystem::path& path, std::size_t line_no,
                                const std::string& why) {
  return SchemaError(path.string() + " line " + std::to_string(line_no) + ": " + why);
}

}  // namespace avcap::data
