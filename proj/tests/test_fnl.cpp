#include <doctest.h>

#include <random>

#include "semforge/fnl.hpp"
#include "semforge/kgraph.hpp"
#include "support/generators.hpp"

using namespace semforge;
using namespace semforge::fnl;

namespace {

const Vocabulary& vocab() { return Vocabulary::builtin(); }

std::vector<std::string> codes(const std::vector<Diagnostic>& diags) {
  std::vector<std::string> out;
  for (const auto& d : diags) out.push_back(d.code);
  return out;
}

bool has_code(const std::vector<Diagnostic>& diags, std::string_view code) {
  for (const auto& d : diags) {
    if (d.code == code) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("minimal statement") {
  auto r = parse_fnl("## snippet 1\n- pendulum is_a: dynamical_system\n", vocab());
  REQUIRE(r.ok());
  const auto& block = r.document.blocks.at(1);
  REQUIRE(block.size() == 1);
  CHECK(block[0].depth == 0);
  CHECK(block[0].subject == Term{Reference{"pendulum"}});
  CHECK(block[0].predicate == "is_a");
  CHECK(block[0].object == Term{Reference{"dynamical_system"}});
  CHECK(block[0].source_line == 2);
}

TEST_CASE("new term with math object") {
  auto r = parse_fnl("## snippet 6\n- \"orthocomplement\" has_notation: $\\mathbb{U}^\\perp$\n", vocab());
  REQUIRE(r.ok());
  const auto& st = r.document.blocks.at(6)[0];
  CHECK(st.subject == Term{NewTerm{"orthocomplement"}});
  CHECK(st.object == Term{Math{"\\mathbb{U}^\\perp"}});
}

TEST_CASE("literal objects follow the predicate's object kind") {
  auto r = parse_fnl("## snippet 1\n- x has_description: \"a set\"\n- x has_source_snippet: 4\n- x is_a: \"set\"\n",
                     vocab());
  REQUIRE(r.ok());
  const auto& b = r.document.blocks.at(1);
  CHECK(b[0].object == Term{StringLiteral{"a set"}});
  CHECK(b[1].object == Term{NumberLiteral{"4"}});
  CHECK(b[2].object == Term{NewTerm{"set"}});
}

TEST_CASE("error codes") {
  auto first_code = [](std::string body) {
    auto r = parse_fnl("## snippet 1\n" + body, vocab());
    CHECK_FALSE(r.ok());
    CHECK(r.document.blocks.empty());
    return r.diagnostics.empty() ? std::string() : r.diagnostics[0].code;
  };
  CHECK(first_code("- x related_to: y\n") == "UnknownPredicate");
  CHECK(first_code(" - x is_a: y\n") == "BadIndent");
  CHECK(first_code("- x is_a: y\n    - is_a: z\n") == "BadIndent");
  CHECK(first_code("\t- x is_a: y\n") == "BadIndent");
  CHECK(first_code("* x is_a: y\n") == "BadIndent");
  CHECK(first_code("- x is_a: \"unterminated\n") == "MalformedTerm");
  CHECK(first_code("- x has_notation: ${a$\n") == "MalformedTerm");
  CHECK(first_code("- x has_notation: y\n") == "MalformedTerm");
  CHECK(first_code("- X is_a: y\n") == "MalformedTerm");
  CHECK(first_code("- 3 is_a: y\n") == "MalformedTerm");
  CHECK(first_code("- x is_a: y z\n") == "MalformedTerm");
  CHECK(first_code("- x setup: y\n") == "ScopeKeywordMisuse");
  CHECK(first_code("- setup: y\n") == "ScopeKeywordMisuse");
  CHECK(first_code("- is_a: y\n") == "OrphanQualifier");
  CHECK(first_code("- setup:\n  - is_a: y\n") == "OrphanQualifier");
}

TEST_CASE("diagnostics carry line and column") {
  auto r = parse_fnl("## snippet 1\n- a is_a: b\n\n- c frob: d\n", vocab());
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].line == 4);
  CHECK(r.diagnostics[0].column == 5);
  CHECK(format_diagnostic(r.diagnostics[0], "x.fnl") == "x.fnl:4:5: error: UnknownPredicate: unknown predicate 'frob'");
}

TEST_CASE("parsing is all-or-nothing per block") {
  auto r = parse_fnl(
      "## snippet 1\n- a is_a: b\n"
      "## snippet 2\n- a is_a: b\n- c frob: d\n- e is_a: f\n"
      "## snippet 3\n- g is_a: h\n",
      vocab());
  CHECK(r.document.blocks.size() == 2);
  CHECK(r.document.blocks.count(1));
  CHECK(r.document.blocks.count(3));
  CHECK(r.rejected_blocks == std::vector<std::uint32_t>{2});
}

TEST_CASE("headers and comments") {
  auto r = parse_fnl("# intro comment\n## snippet 3\n  # indented comment\n- a is_a: b\n## snippets are nice\n", vocab());
  CHECK(r.ok());
  CHECK(codes(parse_fnl("- a is_a: b\n", vocab()).diagnostics) == std::vector<std::string>{"MissingSnippetHeader"});
  CHECK(codes(parse_fnl("## snippet x\n- a is_a: b\n", vocab()).diagnostics) == std::vector<std::string>{"BadHeader"});
  auto dup = parse_fnl("## snippet 1\n- a is_a: b\n## snippet 1\n- c is_a: d\n", vocab());
  CHECK(codes(dup.diagnostics) == std::vector<std::string>{"DuplicateBlock"});
  CHECK(dup.document.blocks.at(1).size() == 1);
}

TEST_CASE("parse_block accepts bare responses and matching headers") {
  auto bare = parse_block("- a is_a: b\n", vocab(), 4);
  auto headed = parse_block("## snippet 4\n- a is_a: b\n", vocab(), 4);
  CHECK(bare.ok());
  CHECK(bare.document == headed.document);
  CHECK(has_code(parse_block("## snippet 5\n- a is_a: b\n", vocab(), 4).diagnostics, "BadHeader"));
  auto empty = parse_block("", vocab(), 4);
  CHECK(empty.ok());
  CHECK(empty.document.blocks.at(4).empty());
}

TEST_CASE("serialization") {
  CHECK(serialize_fnl(Document{}).empty());

  std::string canonical =
      "## snippet 1\n"
      "- \"projection theorem\" is_a: theorem\n"
      "  - setup:\n"
      "    - \"closed subspace\" is_a: subspace\n"
      "  - premise:\n"
      "    - closed_subspace has_part: $x_{1}$\n"
      "- x is_a: y\n"
      "  - has_description: \"quoted \\\"inner\\\" text\"\n"
      "\n"
      "## snippet 2\n";
  auto r = parse_fnl(canonical, vocab());
  REQUIRE(r.ok());
  CHECK(serialize_fnl(r.document) == canonical);
  CHECK(r.document.blocks.at(1)[0].children[0].children[0].depth == 2);
}

TEST_CASE("canonical form normalizes spacing") {
  auto r = parse_fnl("## snippet 1\n- a   is_a:    b   \n", vocab());
  REQUIRE(r.ok());
  CHECK(serialize_fnl(r.document) == "## snippet 1\n- a is_a: b\n");
}

TEST_CASE("round trip on random documents") {
  std::mt19937 rng(17);
  for (int i = 0; i < 300; ++i) {
    auto doc = testing::random_fnl(rng, vocab(), 1 + rng() % 6);
    auto text = serialize_fnl(doc);
    auto r = parse_fnl(text, vocab());
    REQUIRE_MESSAGE(r.ok(), text);
    CHECK(r.document == doc);
    CHECK(serialize_fnl(r.document) == text);
  }
}

TEST_CASE("parser never throws on arbitrary bytes") {
  std::mt19937 rng(23);
  const std::string alphabet = "- \n\t\"$:#ab_is_a{}\\snippet 12\r\x80\xff";
  for (int i = 0; i < 2000; ++i) {
    std::string s = (rng() % 2) ? "## snippet 1\n" : "";
    for (unsigned n = rng() % 80; n > 0; --n) s += alphabet[rng() % alphabet.size()];
    ParseResult r;
    CHECK_NOTHROW(r = parse_fnl(s, vocab()));
    auto lines = static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) + 1;
    for (const auto& d : r.diagnostics) {
      CHECK(d.line >= 1);
      CHECK(d.line <= lines);
    }
  }
}

TEST_CASE("lint") {
  kg::KnowledgeGraph g;
  g.create_item("vector space");
  auto lint_of = [&](std::string text) {
    auto r = parse_fnl("## snippet 1\n" + text, vocab());
    REQUIRE(r.ok());
    return lint(r.document, vocab(), g);
  };
  CHECK(has_code(lint_of("- vektor_raum is_a: vector_space\n"), "UnresolvedReference"));
  CHECK(lint_of("- \"basis\" is_a: vector_space\n- basis is_a: vector_space\n").empty());
  CHECK(has_code(lint_of("- \"a\" is_a: vector_space\n- a is_a: vector_space\n- a is_a: vector_space\n"),
                 "DuplicateStatement"));
  CHECK(has_code(lint_of("- premise:\n  - vector_space is_a: vector_space\n"), "ScopeOutsideTheorem"));
  CHECK(lint_of("- \"t\" is_a: theorem\n  - premise:\n    - t is_a: vector_space\n").size() == 1);  // theorem unresolved
  CHECK(has_code(lint_of("- \"t\" is_a: \"lemma\"\n  - setup:\n"), "EmptyScope"));
  for (const auto& d : lint_of("- vektor_raum is_a: vector_space\n")) CHECK(d.severity == Severity::Warning);
}

TEST_CASE("diff_summary") {
  auto doc = [](std::string text) {
    auto r = parse_fnl(text, vocab());
    REQUIRE(r.ok());
    return r.document;
  };
  std::string ten = "## snippet 1\n";
  for (int i = 0; i < 10; ++i) ten += "- s" + std::to_string(i) + " is_a: t\n";
  auto old_doc = doc(ten);

  auto same = diff_summary(old_doc, old_doc);
  CHECK(same.intervention_rate == 0.0);

  // Counted by definition: one line changed in place, one line appended.
  std::string edited = ten;
  edited.replace(edited.find("- s3 is_a: t"), 12, "- s3 is_a: u");
  edited += "- s10 is_a: t\n";
  auto d = diff_summary(old_doc, doc(edited));
  CHECK(d.modified == 1);
  CHECK(d.added == 1);
  CHECK(d.removed == 0);
  CHECK(d.intervention_rate == doctest::Approx(0.2));

  auto from_empty = diff_summary(Document{}, doc("## snippet 1\n- a is_a: b\n- c is_a: d\n"));
  CHECK(from_empty.added == 2);
  CHECK(from_empty.intervention_rate == 2.0);
}

TEST_CASE("diff_summary symmetry") {
  std::mt19937 rng(31);
  for (int i = 0; i < 100; ++i) {
    auto a = testing::random_fnl(rng, vocab(), 3);
    auto b = testing::random_fnl(rng, vocab(), 3);
    auto ab = diff_summary(a, b);
    auto ba = diff_summary(b, a);
    CHECK(ab.added == ba.removed);
    CHECK(ab.removed == ba.added);
    CHECK(ab.modified == ba.modified);
  }
}

TEST_CASE("vocabulary loading") {
  CHECK(vocab().find("is_a"));
  CHECK(vocab().find("has_notation")->object == ObjectKind::Math);
  CHECK(vocab().is_theorem_kind("lemma"));
  auto custom = Vocabulary::from_toml("[predicates.contains]\nobject = \"entity\"\n");
  CHECK(custom.find("contains"));
  auto bad = [](std::string text) {
    try {
      Vocabulary::from_toml(text);
    } catch (const Error& e) {
      return e.code();
    }
    return std::string();
  };
  CHECK(bad("[predicates.setup]\n") == "BadVocabulary");
  CHECK(bad("[predicates.Bad]\n") == "BadVocabulary");
  CHECK(bad("[predicates.x]\nobject = \"thing\"\n") == "BadVocabulary");
  CHECK(bad("not toml = = \n") == "BadVocabulary");
  CHECK(vocab().describe().find("`has_notation:` object kind math") != std::string::npos);
}
