#pragma once

// Paths into the vector_spaces corpus, scratch directories and an
// in-process CLI runner.

#include <filesystem>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "semforge/cli.hpp"
#include "semforge/fnl.hpp"
#include "semforge/kgraph.hpp"
#include "semforge/latex_ingest.hpp"
#include "semforge/text.hpp"

namespace semforge::testing {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return fs::path(SF_FIXTURE_DIR) / "vector_spaces"; }
inline fs::path fixture(const std::string& rel) { return fixture_dir() / rel; }

inline latex::SourceDocument fixture_doc() {
  return latex::split_document(text::read_file(fixture("doc.tex")), "doc.tex");
}

inline const fnl::Vocabulary& fixture_vocab() {
  static const fnl::Vocabulary v = fnl::Vocabulary::from_toml(text::read_file(fixture("vocabulary.toml")));
  return v;
}

inline kg::KnowledgeGraph fixture_base_graph() { return kg::parse(text::read_file(fixture("base.kgt"))); }

inline fnl::Document fixture_reviewed() {
  return fnl::parse_fnl(text::read_file(fixture("reviewed.fnl")), fixture_vocab()).document;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("semforge-" + tag + "-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

struct ConfigPaths {
  fs::path cache;
  fs::path output;
  fs::path source = fixture("doc.tex");
  fs::path reviewed = fixture("reviewed.fnl");
  std::string mode = "replay";
  std::size_t budget = 16000;
};

// Writes <dir>/semforge.toml for the fixture corpus and returns its path.
inline fs::path write_fixture_config(const fs::path& dir, const ConfigPaths& p) {
  auto lit = [](const fs::path& path) { return "'" + path.string() + "'"; };
  std::ostringstream toml;
  toml << "source = " << lit(p.source) << "\n"
       << "vocabulary = " << lit(fixture("vocabulary.toml")) << "\n"
       << "base_graph = " << lit(fixture("base.kgt")) << "\n"
       << "reviewed_fnl = " << lit(p.reviewed) << "\n"
       << "cache_dir = " << lit(p.cache) << "\n"
       << "output_dir = " << lit(p.output) << "\n"
       << "namespace = \"linalg\"\n"
       << "mode = \"" << p.mode << "\"\n"
       << "budget = " << p.budget << "\n"
       << "[llm]\nendpoint = \"http://127.0.0.1:9/v1/chat/completions\"\nmodel = \"fixture-model\"\n";
  auto path = dir / "semforge.toml";
  fs::create_directories(dir);
  text::write_file(path, toml.str());
  return path;
}

struct CliResult {
  int rc = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args,
                         std::shared_ptr<prompting::Transport> transport = nullptr) {
  std::ostringstream out, err;
  CliResult r;
  r.rc = cli::run(args, out, err, std::move(transport));
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::size_t count_substr(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string_view::npos; p = hay.find(needle, p + needle.size())) ++n;
  return n;
}

}  // namespace semforge::testing
