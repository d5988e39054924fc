#pragma once

// Pipeline configuration (TOML). Relative paths resolve against the
// directory holding the config file.
//
//   source = "doc.tex"              # required
//   template = "prompt.md"          # default: built-in
//   vocabulary = "vocabulary.toml"  # default: built-in
//   base_graph = "base.kgt"         # default: empty graph
//   reviewed_fnl = "reviewed.fnl"   # default: <output_dir>/fnl/reviewed.fnl
//   stylesheet = "style.css"        # default: built-in
//   cache_dir = "cache"             # default: "cache"
//   output_dir = "out"              # default: "out"
//   namespace = "main"
//   mode = "replay"                 # live | record | replay
//   budget = 24000                  # prompt size limit in bytes
//   [llm]
//   endpoint = "https://..."
//   model = "..."
//   [render]
//   refine_tooltips = false
//   mathjax = true

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semforge/error.hpp"
#include "semforge/prompting.hpp"

namespace semforge::config {

namespace fs = std::filesystem;

inline constexpr std::string_view kDefaultEndpoint = "https://api.openai.com/v1/chat/completions";
inline constexpr std::string_view kDefaultModel = "gpt-4o";
inline constexpr std::size_t kDefaultBudget = 24000;

struct PipelineConfig {
  fs::path config_dir;
  fs::path source;
  std::optional<fs::path> template_path;
  std::optional<fs::path> vocabulary;
  std::optional<fs::path> base_graph;
  fs::path reviewed_fnl;
  std::optional<fs::path> stylesheet;
  fs::path cache_dir;
  fs::path output_dir;
  std::string ns = "main";
  prompting::Mode mode = prompting::Mode::Replay;
  std::size_t budget = kDefaultBudget;
  std::string endpoint{kDefaultEndpoint};
  std::string model{kDefaultModel};
  bool refine_tooltips = false;
  bool mathjax = true;
  std::vector<std::string> warnings;  // e.g. ignored keys
};

struct ConfigDiagnostic {
  std::string key;
  std::string code;  // MissingKey, BadValue
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigDiagnostic> diagnostics);
  const std::vector<ConfigDiagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<ConfigDiagnostic> diagnostics_;
};

// Validates keys, types, the mode, and that input files exist. Throws
// ConfigError listing every problem.
PipelineConfig parse_config(std::string_view toml_text, const fs::path& config_dir);
PipelineConfig load_config(const fs::path& path);

}  // namespace semforge::config
