#pragma once

// Prompt templates live in data files (prompts/<version>/<task>.txt) and use
// {{name}} placeholders. Every template starts with a "TASK: <task>" line;
// the mock engine keys its behaviour on it.
//
// Payload conventions shared with the mock engine:
//   text payloads     "<<<TEXT\n" + text + "\nTEXT>>>"
//   source listings   "[i]\n<<<SOURCE\n" + text + "\nSOURCE>>>" per source

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "geo/common/digest.hpp"
#include "geo/common/error.hpp"

#ifndef GEO_DEFAULT_PROMPT_DIR
#define GEO_DEFAULT_PROMPT_DIR "prompts/v1"
#endif

namespace geo::genengine {

inline constexpr std::string_view kTextOpen = "<<<TEXT\n";
inline constexpr std::string_view kTextClose = "\nTEXT>>>";
inline constexpr std::string_view kSourceOpen = "<<<SOURCE\n";
inline constexpr std::string_view kSourceClose = "\nSOURCE>>>";

inline std::string wrap_text(std::string_view text) {
  return std::string(kTextOpen) + std::string(text) + std::string(kTextClose);
}

class PromptSet {
 public:
  static constexpr const char* kTasks[] = {"queries", "citations", "fluency", "statistics", "answer"};

  static PromptSet load(const std::filesystem::path& dir = GEO_DEFAULT_PROMPT_DIR) {
    PromptSet set;
    set.dir_ = dir;
    for (const char* task : kTasks) {
      const auto path = dir / (std::string(task) + ".txt");
      if (!std::filesystem::exists(path)) throw config_error("missing prompt template " + path.string());
      set.templates_[task] = read_file(path);
    }
    return set;
  }

  const std::filesystem::path& dir() const { return dir_; }

  /// Substitutes {{key}} placeholders. Unknown placeholders are an error.
  std::string render(const std::string& task, const std::map<std::string, std::string>& values) const {
    auto it = templates_.find(task);
    if (it == templates_.end()) throw config_error("no prompt template for task '" + task + "'");
    const std::string& tpl = it->second;
    std::string out;
    std::size_t pos = 0;
    while (true) {
      const auto open = tpl.find("{{", pos);
      if (open == std::string::npos) break;
      const auto close = tpl.find("}}", open + 2);
      if (close == std::string::npos) break;
      out.append(tpl, pos, open - pos);
      const std::string key = tpl.substr(open + 2, close - open - 2);
      auto v = values.find(key);
      if (v == values.end()) throw config_error("template '" + task + "' needs value for {{" + key + "}}");
      out.append(v->second);
      pos = close + 2;
    }
    out.append(tpl, pos, std::string::npos);
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> templates_;
};

}  // namespace geo::genengine
