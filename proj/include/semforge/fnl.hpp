#pragma once

// Formal Natural Language: the controlled, line-oriented intermediate form
// between LLM output and the knowledge graph.
//
//   ## snippet 8
//   - "orthogonal decomposition theorem" is_a: theorem
//     - setup:
//       - "ambient space" is_a: inner_product_space
//   - orthocomplement is_a: subspace
//     - quantifier: "for every subspace"
//
// A line is either `- subject predicate: object`, a scope keyword
// (`- setup:`), or a qualifier of its parent (`- predicate: object`).
// Children are indented by two spaces per level.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semforge/error.hpp"

namespace semforge::kg {
class KnowledgeGraph;
}

namespace semforge::fnl {

enum class ObjectKind { Entity, Literal, Math, Any };

struct PredicateInfo {
  ObjectKind object = ObjectKind::Entity;
  std::string doc;
};

inline constexpr std::string_view kScopeKeywords[] = {"setup", "premise", "assertion"};
bool is_scope_keyword(std::string_view word);

struct Vocabulary {
  std::map<std::string, PredicateInfo, std::less<>> predicates;
  // Objects of `is_a` that mark a statement as introducing a theorem.
  std::vector<std::string> theorem_kinds;

  const PredicateInfo* find(std::string_view keyword) const;
  bool is_theorem_kind(std::string_view identifier) const;

  // Human-readable listing used in the prompt.
  std::string describe() const;

  // Throws Error("BadVocabulary").
  static Vocabulary from_toml(std::string_view text);
  static const Vocabulary& builtin();
};

struct Reference {
  std::string name;
  friend bool operator==(const Reference&, const Reference&) = default;
};
struct NewTerm {
  std::string label;
  friend bool operator==(const NewTerm&, const NewTerm&) = default;
};
struct Math {
  std::string latex;  // without the surrounding $
  friend bool operator==(const Math&, const Math&) = default;
};
struct StringLiteral {
  std::string value;
  friend bool operator==(const StringLiteral&, const StringLiteral&) = default;
};
struct NumberLiteral {
  std::string text;
  friend bool operator==(const NumberLiteral&, const NumberLiteral&) = default;
};

using Term = std::variant<Reference, NewTerm, Math, StringLiteral, NumberLiteral>;

std::string format_term(const Term& term);

struct Statement {
  std::optional<Term> subject;  // absent for scope keywords and qualifiers
  std::string predicate;
  std::optional<Term> object;   // absent for scope keywords
  int depth = 0;
  std::vector<Statement> children;
  std::size_t source_line = 0;

  bool is_scope() const { return !subject && !object; }
  bool is_qualifier() const { return !subject && object.has_value(); }

  // Equality ignores source_line.
  friend bool operator==(const Statement& a, const Statement& b) {
    return a.subject == b.subject && a.predicate == b.predicate && a.object == b.object && a.depth == b.depth &&
           a.children == b.children;
  }
};

using Block = std::vector<Statement>;

struct Document {
  std::map<std::uint32_t, Block> blocks;
  friend bool operator==(const Document&, const Document&) = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::size_t line = 0;
  std::size_t column = 0;
  std::string code;
  std::string message;
};

std::string format_diagnostic(const Diagnostic& d, std::string_view file = {});
bool has_errors(const std::vector<Diagnostic>& diags);

struct ParseResult {
  Document document;                       // only blocks that parsed cleanly
  std::vector<Diagnostic> diagnostics;
  std::vector<std::uint32_t> rejected_blocks;
  bool ok() const { return !has_errors(diagnostics); }
};

// Never throws on malformed input; every problem becomes a diagnostic and
// invalidates the snippet block that contains it.
ParseResult parse_fnl(std::string_view text, const Vocabulary& vocab);

// Parses `text` as the body of a single block (an LLM response). A leading
// `## snippet <id>` header is accepted when it names `snippet_id`.
ParseResult parse_block(std::string_view text, const Vocabulary& vocab, std::uint32_t snippet_id);

// `subject predicate: object` etc., without bullet or indentation.
std::string canonical_line(const Statement& st);
std::string serialize_block(const Block& block);
std::string serialize_fnl(const Document& doc);

std::size_t count_statements(const Block& block);
std::size_t count_statements(const Document& doc);

std::vector<Diagnostic> lint(const Document& doc, const Vocabulary& vocab, const kg::KnowledgeGraph& graph);

struct DiffSummary {
  std::size_t added = 0;
  std::size_t removed = 0;
  std::size_t modified = 0;
  double intervention_rate = 0.0;
};

// Per snippet block, statements are compared by their indented canonical
// line. Unmatched old/new lines pair up as modifications; the remainder are
// removals or additions.
DiffSummary diff_summary(const Document& old_doc, const Document& new_doc);

}  // namespace semforge::fnl
