#include <doctest.h>

#include <cstdlib>

#include "semforge/config.hpp"
#include "semforge/prompting.hpp"
#include "support/fixture.hpp"
#include "support/fixture_llm.hpp"

using namespace semforge;
using namespace semforge::testing;

namespace {

std::vector<std::string> diag_keys(const std::string& toml, const fs::path& dir, const std::string& code) {
  try {
    config::parse_config(toml, dir);
  } catch (const config::ConfigError& e) {
    std::vector<std::string> keys;
    for (const auto& d : e.diagnostics()) {
      if (d.code == code) keys.push_back(d.key);
    }
    return keys;
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  TempDir tmp("cfg");
  text::write_file(tmp / "doc.tex", "% !snippet 1\nx\n");
  auto cfg = config::parse_config("source = \"doc.tex\"\n", tmp.path());
  CHECK(cfg.source == (tmp / "doc.tex").lexically_normal());
  CHECK(cfg.mode == prompting::Mode::Replay);
  CHECK(cfg.ns == "main");
  CHECK(cfg.budget == config::kDefaultBudget);
  CHECK(cfg.cache_dir == (tmp / "cache").lexically_normal());
  CHECK(cfg.output_dir == (tmp / "out").lexically_normal());
  CHECK(cfg.reviewed_fnl == cfg.output_dir / "fnl" / "reviewed.fnl");
  CHECK_FALSE(cfg.template_path);
  CHECK(cfg.warnings.empty());
}

TEST_CASE("config diagnostics name the key") {
  TempDir tmp("cfg");
  text::write_file(tmp / "doc.tex", "% !snippet 1\nx\n");
  CHECK(diag_keys("mode = \"replay\"\n", tmp.path(), "MissingKey") == std::vector<std::string>{"source"});
  CHECK(diag_keys("source = \"doc.tex\"\nmode = \"lve\"\n", tmp.path(), "BadValue") ==
        std::vector<std::string>{"mode"});
  CHECK(diag_keys("source = \"nope.tex\"\n", tmp.path(), "BadValue") == std::vector<std::string>{"source"});
  CHECK(diag_keys("source = \"doc.tex\"\nbudget = -3\n", tmp.path(), "BadValue") ==
        std::vector<std::string>{"budget"});
  CHECK(diag_keys("source = \"doc.tex\"\nnamespace = \"a b\"\n", tmp.path(), "BadValue") ==
        std::vector<std::string>{"namespace"});
  CHECK(diag_keys("source = \"doc.tex\"\n[render]\nmathjax = \"yes\"\n", tmp.path(), "BadValue") ==
        std::vector<std::string>{"render.mathjax"});
  CHECK(diag_keys("source = 3\nmode = \"x\"\n", tmp.path(), "BadValue").size() == 2);
  CHECK_THROWS_AS(config::parse_config("source = \n", tmp.path()), config::ConfigError);
}

TEST_CASE("credentials in the config file are ignored with a warning") {
  TempDir tmp("cfg");
  text::write_file(tmp / "doc.tex", "% !snippet 1\nx\n");
  auto cfg = config::parse_config("source = \"doc.tex\"\n[llm]\napi_key = \"sk-secret\"\nmodel = \"m\"\n", tmp.path());
  REQUIRE(cfg.warnings.size() == 1);
  CHECK(cfg.warnings[0].find(prompting::kApiKeyEnv) != std::string::npos);
  CHECK(cfg.warnings[0].find("sk-secret") == std::string::npos);
  CHECK(cfg.model == "m");
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli({}).rc == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).rc == cli::kExitUsage);
  CHECK(run_cli({"prompt"}).rc == cli::kExitUsage);
  CHECK(run_cli({"--mode", "lve", "split"}).rc == cli::kExitUsage);
  auto missing = run_cli({"--config", "/nonexistent/semforge.toml", "split"});
  CHECK(missing.rc == cli::kExitUsage);
  CHECK(missing.err.find("not found") != std::string::npos);
  CHECK(run_cli({"--help"}).rc == cli::kExitOk);
}

TEST_CASE("budget below the untruncatable minimum is a config error") {
  TempDir tmp("budget");
  ConfigPaths p{tmp / "cache", tmp / "out"};
  p.budget = 100;
  auto cfg = write_fixture_config(tmp.path(), p).string();
  auto r = run_cli({"--config", cfg, "prompt", "--snippet", "3"});
  CHECK(r.rc == cli::kExitUsage);
  CHECK(r.err.find("BadValue(budget)") != std::string::npos);
}

TEST_CASE("split and prompt") {
  TempDir tmp("split");
  auto cfg = write_fixture_config(tmp.path(), {fixture("cache"), tmp / "out"}).string();
  auto split = run_cli({"--config", cfg, "split"});
  CHECK(split.rc == 0);
  CHECK(count_substr(split.out, "snippet ") == 10);
  CHECK(split.out.rfind("snippet 1: lines 10-15, 2 sentence(s)\n", 0) == 0);

  auto prompt = run_cli({"--config", cfg, "prompt", "--snippet", "6"});
  CHECK(prompt.rc == 0);
  CHECK(prompt.out.find(fixture_doc().find(6)->body) != std::string::npos);
  CHECK(prompt.out.find("## snippet 5\n") != std::string::npos);
  CHECK(prompt.err.find("content hash: ") == 0);
  CHECK(run_cli({"--config", cfg, "prompt", "--snippet", "42"}).rc == cli::kExitFailure);
}

TEST_CASE("cold cache extraction fails with CacheMiss") {
  TempDir tmp("cold");
  auto cfg = write_fixture_config(tmp.path(), {tmp / "empty-cache", tmp / "out"}).string();
  auto r = run_cli({"--config", cfg, "extract"});
  CHECK(r.rc == cli::kExitFailure);
  CHECK(r.err.find("CacheMiss") != std::string::npos);
}

TEST_CASE("extract ranges, lint, diff, compile, query, render") {
  TempDir tmp("stages");
  auto cfg = write_fixture_config(tmp.path(), {fixture("cache"), tmp / "out"}).string();
  auto part = run_cli({"--config", cfg, "extract", "--from", "3", "--to", "5"});
  CHECK(part.rc == 0);
  auto partial = fnl::parse_fnl(text::read_file(tmp / "out/fnl/extracted.fnl"), fixture_vocab());
  std::vector<std::uint32_t> ids;
  for (const auto& [id, b] : partial.document.blocks) ids.push_back(id);
  CHECK(ids == std::vector<std::uint32_t>{3, 4, 5});
  CHECK(fs::exists(tmp / "out/fnl/raw/snippet-4.txt"));
  CHECK(text::read_file(tmp / "out/fnl/raw/snippet-4.txt") == text::read_file(fixture("llm_responses/snippet-4.fnl")));

  CHECK(run_cli({"--config", cfg, "extract"}).rc == 0);
  CHECK(text::read_file(tmp / "out/fnl/extracted.fnl") == text::read_file(fixture("golden/extracted.fnl")));

  auto lint = run_cli({"--config", cfg, "lint"});
  CHECK(lint.rc == 0);
  CHECK(lint.out.find("0 error(s)") != std::string::npos);

  // The raw extraction references the orthocomplement one snippet early.
  auto raw_compile = run_cli({"--config", cfg, "compile", (tmp / "out/fnl/extracted.fnl").string()});
  CHECK(raw_compile.rc == cli::kExitFailure);
  CHECK(raw_compile.err.find("UnresolvedReference") != std::string::npos);

  auto diff = run_cli({"--config", cfg, "diff", (tmp / "out/fnl/extracted.fnl").string(),
                       fixture("reviewed.fnl").string()});
  CHECK(diff.rc == 0);
  CHECK(diff.out.find("added: 1\nremoved: 1\nmodified: 1\n") != std::string::npos);

  auto compile = run_cli({"--config", cfg, "compile"});
  CHECK(compile.rc == 0);
  CHECK(text::read_file(tmp / "out/graph.kgt") == text::read_file(fixture("golden/graph.kgt")));
  CHECK(fs::exists(tmp / "out/graph.kgb"));
  CHECK(fs::exists(tmp / "out/reports/compile.txt"));
  CHECK(text::read_file(tmp / "out/reports/intervention.txt").find("intervention rate: 0.0698") != std::string::npos);

  auto q = run_cli({"--config", cfg, "query", "orthocomplement is_a ?"});
  CHECK(q.rc == 0);
  CHECK(count_substr(q.out, "\n") == 2);
  CHECK(run_cli({"--config", cfg, "query", "? ? lit:str:\"symmetric\""}).out.size() > 0);
  CHECK(run_cli({"--config", cfg, "query", "\"inner product space\" subclass_of vector_space"}).out.size() > 0);
  CHECK(run_cli({"--config", cfg, "query", "nothing_here is_a ?"}).rc == cli::kExitFailure);
  CHECK(run_cli({"--config", cfg, "query", "a b"}).rc == cli::kExitUsage);

  auto render = run_cli({"--config", cfg, "render"});
  CHECK(render.rc == 0);
  auto html = text::read_file(tmp / "out/doc.html");
  CHECK(count_substr(html, "class=\"tooltip\"") == 55);
  CHECK(render.err.find("PreDefinitionUse") != std::string::npos);

  TempDir css("css");
  text::write_file(css / "x.css", "p { color: teal; }\n");
  CHECK(run_cli({"--config", cfg, "--stylesheet", (css / "x.css").string(), "render"}).rc == 0);
  CHECK(text::read_file(tmp / "out/doc.html").find("p { color: teal; }") != std::string::npos);
}

TEST_CASE("the lint gate stops the pipeline") {
  TempDir tmp("gate");
  text::write_file(tmp / "reviewed.fnl", text::read_file(fixture("reviewed.fnl")) + "- x frobnicates: y\n");
  ConfigPaths p{fixture("cache"), tmp / "out"};
  p.reviewed = tmp / "reviewed.fnl";
  auto cfg = write_fixture_config(tmp.path(), p).string();
  auto r = run_cli({"--config", cfg, "pipeline"});
  CHECK(r.rc == cli::kExitFailure);
  CHECK(r.out.find("UnknownPredicate") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "out/graph.kgt"));
  CHECK(run_cli({"--config", cfg, "compile"}).rc == cli::kExitFailure);
}

TEST_CASE("pipeline equals the composition of its stages") {
  TempDir tmp("compose");
  auto one = write_fixture_config(tmp / "one", {fixture("cache"), tmp / "one/out"}).string();
  auto two = write_fixture_config(tmp / "two", {fixture("cache"), tmp / "two/out"}).string();
  REQUIRE(run_cli({"--config", one, "pipeline"}).rc == 0);
  for (const char* stage : {"extract", "lint", "compile", "render"}) {
    REQUIRE(run_cli({"--config", two, stage}).rc == 0);
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(tmp / "one/out")) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), tmp / "one/out"));
  }
  CHECK(files.size() >= 18);
  for (const auto& rel : files) {
    CHECK_MESSAGE(text::read_file(tmp / "one/out" / rel) == text::read_file(tmp / "two/out" / rel), rel.string());
  }
}

TEST_CASE("record mode through the command line") {
  TempDir tmp("rec");
  ConfigPaths p{tmp / "cache", tmp / "out"};
  p.mode = "record";
  auto cfg = write_fixture_config(tmp.path(), p).string();
  setenv(prompting::kApiKeyEnv, "fixture", 1);
  auto transport = std::make_shared<FixtureTransport>(fixture("llm_responses"));
  CHECK(run_cli({"--config", cfg, "extract"}, transport).rc == 0);
  CHECK(transport->calls == 10);
  auto recorded = text::read_file(tmp / "out/fnl/extracted.fnl");
  CHECK(run_cli({"--config", cfg, "--mode", "replay", "extract"}).rc == 0);
  CHECK(text::read_file(tmp / "out/fnl/extracted.fnl") == recorded);
  unsetenv(prompting::kApiKeyEnv);
}
