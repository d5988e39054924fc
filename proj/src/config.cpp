#include "semforge/config.hpp"

#include <set>

#include <toml.hpp>

#include "semforge/kgraph.hpp"
#include "semforge/text.hpp"

namespace semforge::config {

namespace {

std::string summarize(const std::vector<ConfigDiagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "; ";
    out += d.code + "(" + d.key + "): " + d.message;
  }
  return out;
}

class Reader {
 public:
  Reader(const toml::table& root, const fs::path& dir, std::vector<ConfigDiagnostic>& diags)
      : root_(root), dir_(dir), diags_(diags) {}

  void bad(const std::string& key, const std::string& message) { diags_.push_back({key, "BadValue", message}); }
  void missing(const std::string& key, const std::string& message) { diags_.push_back({key, "MissingKey", message}); }

  std::optional<std::string> string(const std::string& key) {
    auto node = root_.at_path(key);
    if (!node) return std::nullopt;
    auto value = node.value<std::string>();
    if (!value) {
      bad(key, "must be a string");
      return std::nullopt;
    }
    return value;
  }

  std::optional<fs::path> path(const std::string& key, bool must_exist) {
    auto value = string(key);
    if (!value) return std::nullopt;
    if (value->empty()) {
      bad(key, "must not be empty");
      return std::nullopt;
    }
    fs::path p = fs::path(*value).is_absolute() ? fs::path(*value) : dir_ / *value;
    p = p.lexically_normal();
    if (must_exist && !fs::exists(p)) {
      bad(key, "file '" + p.string() + "' does not exist");
      return std::nullopt;
    }
    return p;
  }

  std::optional<bool> boolean(const std::string& key) {
    auto node = root_.at_path(key);
    if (!node) return std::nullopt;
    auto value = node.value<bool>();
    if (!value || !node.is_boolean()) {
      bad(key, "must be true or false");
      return std::nullopt;
    }
    return value;
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    auto node = root_.at_path(key);
    if (!node) return std::nullopt;
    if (!node.is_integer()) {
      bad(key, "must be an integer");
      return std::nullopt;
    }
    return node.value<std::int64_t>();
  }

 private:
  const toml::table& root_;
  fs::path dir_;
  std::vector<ConfigDiagnostic>& diags_;
};

}  // namespace

ConfigError::ConfigError(std::vector<ConfigDiagnostic> diagnostics)
    : Error(diagnostics.empty() ? "BadValue" : diagnostics.front().code, summarize(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

PipelineConfig parse_config(std::string_view toml_text, const fs::path& config_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    auto line = std::to_string(e.source().begin.line);
    throw ConfigError({{"(file)", "BadValue", "line " + line + ": " + std::string(e.description())}});
  }
  std::vector<ConfigDiagnostic> diags;
  Reader r(root, config_dir, diags);
  PipelineConfig cfg;
  cfg.config_dir = config_dir;

  static const std::set<std::string, std::less<>> kTop = {"source", "template", "vocabulary", "base_graph",
                                                          "reviewed_fnl", "stylesheet", "cache_dir", "output_dir",
                                                          "namespace", "mode", "budget", "llm", "render"};
  static const std::set<std::string, std::less<>> kLlm = {"endpoint", "model", "api_key"};
  static const std::set<std::string, std::less<>> kRender = {"refine_tooltips", "mathjax"};
  for (const auto& [key, node] : root) {
    if (!kTop.count(key.str())) cfg.warnings.push_back("unknown key '" + std::string(key.str()) + "' ignored");
  }
  for (auto [section, known] : {std::pair{"llm", &kLlm}, std::pair{"render", &kRender}}) {
    auto node = root[section];
    if (!node) continue;
    if (!node.is_table()) {
      r.bad(section, "must be a table");
      continue;
    }
    for (const auto& [key, value] : *node.as_table()) {
      if (!known->count(key.str())) {
        cfg.warnings.push_back("unknown key '" + std::string(section) + "." + std::string(key.str()) + "' ignored");
      }
    }
  }

  if (!root.contains("source")) {
    r.missing("source", "the LaTeX source path is required");
  } else if (auto p = r.path("source", true)) {
    cfg.source = *p;
  }
  cfg.template_path = r.path("template", true);
  cfg.vocabulary = r.path("vocabulary", true);
  cfg.base_graph = r.path("base_graph", true);
  cfg.stylesheet = r.path("stylesheet", true);
  cfg.cache_dir = r.path("cache_dir", false).value_or((config_dir / "cache").lexically_normal());
  cfg.output_dir = r.path("output_dir", false).value_or((config_dir / "out").lexically_normal());
  cfg.reviewed_fnl = r.path("reviewed_fnl", false).value_or(cfg.output_dir / "fnl" / "reviewed.fnl");

  if (auto ns = r.string("namespace")) {
    if (kg::is_valid_namespace(*ns)) {
      cfg.ns = *ns;
    } else {
      r.bad("namespace", "'" + *ns + "' is not a valid namespace token");
    }
  }
  if (auto mode = r.string("mode")) {
    if (auto m = prompting::mode_from_string(*mode)) {
      cfg.mode = *m;
    } else {
      r.bad("mode", "'" + *mode + "' is not one of live, record, replay");
    }
  }
  if (auto budget = r.integer("budget")) {
    if (*budget <= 0) {
      r.bad("budget", "must be positive");
    } else {
      cfg.budget = static_cast<std::size_t>(*budget);
    }
  }
  if (auto endpoint = r.string("llm.endpoint")) cfg.endpoint = *endpoint;
  if (auto model = r.string("llm.model")) {
    if (model->empty()) {
      r.bad("llm.model", "must not be empty");
    } else {
      cfg.model = *model;
    }
  }
  if (root.at_path("llm.api_key")) {
    cfg.warnings.push_back(std::string("llm.api_key in the config file is ignored; set ") + prompting::kApiKeyEnv +
                           " instead");
  }
  if (auto refine = r.boolean("render.refine_tooltips")) cfg.refine_tooltips = *refine;
  if (auto mathjax = r.boolean("render.mathjax")) cfg.mathjax = *mathjax;

  if (!diags.empty()) throw ConfigError(std::move(diags));
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) {
    throw ConfigError({{"(file)", "MissingKey", "config file '" + path.string() + "' not found"}});
  }
  auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_config(text::read_file(path), dir);
}

}  // namespace semforge::config
