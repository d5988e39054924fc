// Rebuilds the replay cache of a fixture corpus from its llm_responses/
// directory. Run after changing the document, template or vocabulary:
//
//   record_fixture_cache tests/fixtures/vector_spaces

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>

#include "semforge/cli.hpp"
#include "support/fixture_llm.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: record_fixture_cache FIXTURE_DIR\n";
    return 2;
  }
  namespace fs = std::filesystem;
  fs::path dir = argv[1];
  fs::remove_all(dir / "cache");
  setenv(semforge::prompting::kApiKeyEnv, "fixture", 1);
  auto transport = std::make_shared<semforge::testing::FixtureTransport>(dir / "llm_responses");
  auto config = (dir / "semforge.toml").string();
  int rc = semforge::cli::run({"--config", config, "--mode", "record", "extract"}, std::cout, std::cerr, transport);
  std::cerr << transport->calls << " request(s) recorded\n";
  return rc;
}
