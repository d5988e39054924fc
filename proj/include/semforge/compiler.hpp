#pragma once

// FNL -> knowledge graph.
//
// Terms resolve in the order: bindings made earlier in the same compile
// call, exact item label, identifier form of an item label, and (for math
// terms) the notation index. Unquoted names that resolve nowhere are errors;
// only quoted terms create items.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semforge/error.hpp"
#include "semforge/fnl.hpp"
#include "semforge/kgraph.hpp"

namespace semforge::compiler {

class CompileError : public Error {
 public:
  CompileError(std::string code, std::uint32_t snippet, std::size_t line, const std::string& message);
  std::uint32_t snippet() const noexcept { return snippet_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::uint32_t snippet_;
  std::size_t line_;
};

struct CompileReport {
  std::vector<kg::Uri> created_entities;
  std::vector<kg::Uri> asserted_statements;    // from FNL lines and theorem scopes
  std::vector<kg::Uri> provenance_statements;  // (item, has_source_snippet, k) per created item
  std::vector<fnl::Diagnostic> diagnostics;  // warnings
};

// Names bound within one compile call: quoted labels, their identifier
// forms, and "$<normalized math>" for notations registered in the call.
using Bindings = std::map<std::string, kg::Uri, std::less<>>;

// Resolves a reference or math term. Throws CompileError with codes
// UnresolvedReference, AmbiguousReference or AmbiguousNotation (snippet and
// line 0; compile() fills them in).
kg::Uri resolve_term(const fnl::Term& term, const kg::KnowledgeGraph& graph, const Bindings& bindings);

// Compiles every block in id order onto `graph`. Either all blocks compile
// and the graph is updated, or a CompileError is thrown and `graph` is
// unchanged. Codes: UnresolvedReference, AmbiguousReference,
// AmbiguousNotation, Recompiled, DuplicateScope, EmptyScope,
// ScopeKeywordMisuse, InvalidTerm.
CompileReport compile(const fnl::Document& doc, kg::KnowledgeGraph& graph, const fnl::Vocabulary& vocab);

// Plain-text report: counts, then one line per created entity / statement,
// then warnings.
std::string format_report(const CompileReport& report, const kg::KnowledgeGraph& graph);

}  // namespace semforge::compiler
