#include <set>

#include "semforge/fnl.hpp"
#include "semforge/kgraph.hpp"
#include "semforge/text.hpp"

namespace semforge::fnl {

namespace {

Diagnostic warning(std::size_t line, std::string code, std::string message) {
  return Diagnostic{Severity::Warning, line, 1, std::move(code), std::move(message)};
}

bool introduces_theorem(const Statement* st, const Vocabulary& vocab) {
  if (!st || !st->subject || st->predicate != "is_a" || !st->object) return false;
  if (const auto* r = std::get_if<Reference>(&*st->object)) return vocab.is_theorem_kind(r->name);
  if (const auto* t = std::get_if<NewTerm>(&*st->object)) return vocab.is_theorem_kind(text::identifier_of(t->label));
  return false;
}

class Linter {
 public:
  Linter(const Vocabulary& vocab, const kg::KnowledgeGraph& graph) : vocab_(vocab) {
    for (const auto& [uri, entity] : graph.entities()) {
      if (const auto* item = std::get_if<kg::Item>(&entity)) {
        known_.insert(item->label);
        known_.insert(text::identifier_of(item->label));
      }
    }
  }

  void run(const Document& doc) {
    for (const auto& [id, block] : doc.blocks) walk(block, nullptr, "");
  }

  std::vector<Diagnostic> take() { return std::move(out_); }

 private:
  void term(const std::optional<Term>& t, std::size_t line) {
    if (!t) return;
    if (const auto* nt = std::get_if<NewTerm>(&*t)) {
      known_.insert(nt->label);
      known_.insert(text::identifier_of(nt->label));
    } else if (const auto* r = std::get_if<Reference>(&*t)) {
      if (!known_.count(r->name)) {
        out_.push_back(warning(line, "UnresolvedReference",
                               "'" + r->name + "' is neither a graph label nor introduced earlier as a quoted term"));
      }
    }
  }

  void walk(const Block& block, const Statement* parent, const std::string& path) {
    for (const auto& st : block) {
      if (st.is_scope()) {
        if (!introduces_theorem(parent, vocab_)) {
          out_.push_back(warning(st.source_line, "ScopeOutsideTheorem",
                                 "'" + st.predicate + ":' must be nested under a theorem-introducing statement"));
        }
        if (st.children.empty()) {
          out_.push_back(warning(st.source_line, "EmptyScope", "'" + st.predicate + ":' has no statements"));
        }
      } else {
        term(st.subject, st.source_line);
        term(st.object, st.source_line);
        auto key = path + '\n' + canonical_line(st);
        if (!seen_.insert(key).second) {
          out_.push_back(warning(st.source_line, "DuplicateStatement", "duplicate statement '" + canonical_line(st) + "'"));
        }
      }
      walk(st.children, &st, path + '\n' + canonical_line(st));
    }
  }

  const Vocabulary& vocab_;
  std::set<std::string, std::less<>> known_;
  std::set<std::string> seen_;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> lint(const Document& doc, const Vocabulary& vocab, const kg::KnowledgeGraph& graph) {
  Linter linter(vocab, graph);
  linter.run(doc);
  return linter.take();
}

}  // namespace semforge::fnl
