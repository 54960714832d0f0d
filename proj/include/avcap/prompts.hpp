#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>

#include "avcap/errors.hpp"
#include "avcap/judge_types.hpp"

namespace avcap::judge {

/// Loads prompt templates from a directory (one .txt file per protocol) and
/// renders them by substituting {placeholder} names. Templates are data:
/// editing a file changes the protocol without a rebuild. A brace sequence
/// is only treated as a placeholder when it holds a [a-z0-9_]+ name that the
/// caller supplied, so JSON braces inside template prose survive untouched.
class PromptLibrary {
 public:
  explicit PromptLibrary(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) {
      throw ConfigError("PromptLibrary: not a directory: " + dir_.string());
    }
  }

  static std::string template_filename(Protocol p) {
    return std::string(to_string(p)) + ".txt";
  }

  const std::string& raw(Protocol p) const {
    std::scoped_lock lock(mutex_);
    auto it = cache_.find(p);
    if (it != cache_.end()) return it->second;
    const auto path = dir_ / template_filename(p);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("PromptLibrary: missing template file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return cache_.emplace(p, buf.str()).first->second;
  }

  std::string render(Protocol p, const std::map<std::string, std::string>& vars) const {
    const std::string& tpl = raw(p);
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
      if (tpl[i] != '{') {
        out.push_back(tpl[i++]);
        continue;
      }
      std::size_t j = i + 1;
      while (j < tpl.size() && (std::islower(static_cast<unsigned char>(tpl[j])) ||
                                std::isdigit(static_cast<unsigned char>(tpl[j])) || tpl[j] == '_')) {
        ++j;
      }
      if (j > i + 1 && j < tpl.size() && tpl[j] == '}') {
        const std::string name = tpl.substr(i + 1, j - i - 1);
        auto it = vars.find(name);
        if (it != vars.end()) {
          out += it->second;
          i = j + 1;
          continue;
        }
      }
      out.push_back(tpl[i++]);
    }
    return out;
  }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  mutable std::map<Protocol, std::string> cache_;
};

}  // namespace avcap::judge
