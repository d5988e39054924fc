#include "semforge/compiler.hpp"

#include <charconv>
#include <set>

#include "semforge/text.hpp"

namespace semforge::compiler {

namespace {

using fnl::Statement;
using fnl::Term;

const char* term_kind(const Term& t) {
  switch (t.index()) {
    case 0: return "reference";
    case 1: return "quoted term";
    case 2: return "math term";
    default: return "literal";
  }
}

bool names_theorem_kind(const Statement& st, const fnl::Vocabulary& vocab) {
  if (st.predicate != "is_a" || !st.object) return false;
  if (const auto* r = std::get_if<fnl::Reference>(&*st.object)) return vocab.is_theorem_kind(r->name);
  if (const auto* t = std::get_if<fnl::NewTerm>(&*st.object)) return vocab.is_theorem_kind(text::identifier_of(t->label));
  return false;
}

class Unit {
 public:
  Unit(kg::KnowledgeGraph& graph, const fnl::Vocabulary& vocab, CompileReport& report)
      : g_(graph), vocab_(vocab), report_(report) {}

  void prescan(const fnl::Document& doc) {
    for (const auto& [id, block] : doc.blocks) prescan(id, block);
  }

  void block(std::uint32_t id, const fnl::Block& block) {
    snippet_ = id;
    line_ = 0;
    check_not_compiled();
    for (const auto& st : block) statement(st, std::nullopt);
  }

 private:
  [[noreturn]] void fail(std::string code, const std::string& message) const {
    throw CompileError(std::move(code), snippet_, line_, message);
  }

  void warn(std::string code, const std::string& message) {
    report_.diagnostics.push_back(
        fnl::Diagnostic{fnl::Severity::Warning, line_, 1, std::move(code), "snippet " + std::to_string(snippet_) + ": " + message});
  }

  void prescan(std::uint32_t id, const fnl::Block& block) {
    for (const auto& st : block) {
      for (const auto* t : {&st.subject, &st.object}) {
        if (!*t) continue;
        if (const auto* nt = std::get_if<fnl::NewTerm>(&**t)) {
          introduced_.emplace(nt->label, id);
          introduced_.emplace(text::identifier_of(nt->label), id);
        }
      }
      prescan(id, st.children);
    }
  }

  void check_not_compiled() const {
    auto source = *g_.builtin("has_source_snippet");
    const kg::Object tag = kg::Literal::integer(snippet_);
    for (const auto& [uri, entity] : g_.entities()) {
      if (const auto* item = std::get_if<kg::Item>(&entity); item && item->provenance == snippet_) {
        fail("Recompiled", "snippet " + std::to_string(snippet_) + " is already compiled into the graph (" +
                               uri.str() + ")");
      }
    }
    for (const auto& st : g_.statements()) {
      for (const auto& q : st.qualifiers) {
        if (q.relation == source && q.value == tag) {
          fail("Recompiled", "snippet " + std::to_string(snippet_) + " is already compiled into the graph (" +
                                 st.uri.str() + ")");
        }
      }
    }
  }

  // Wraps graph mutations so their errors carry snippet and line.
  template <typename Fn>
  auto guarded(Fn&& fn) {
    try {
      return fn();
    } catch (const CompileError& e) {
      if (e.snippet() != 0) throw;
      auto message = std::string(e.what());
      if (e.code() == "UnresolvedReference") {
        auto begin = message.find('\'');
        auto end = message.find('\'', begin + 1);
        if (begin != std::string::npos && end != std::string::npos) {
          auto name = message.substr(begin + 1, end - begin - 1);
          if (auto it = introduced_.find(name); it != introduced_.end() && it->second > snippet_) {
            message += "; it is introduced later, in snippet " + std::to_string(it->second) +
                       " (forward references are not supported)";
          }
        }
      }
      fail(e.code(), message);
    } catch (const kg::GraphError& e) {
      fail(e.code(), e.what());
    }
  }

  kg::Qualifier provenance() const { return {*g_.builtin("has_source_snippet"), kg::Literal::integer(snippet_)}; }

  kg::Uri relation(const std::string& keyword) {
    if (auto r = g_.relation_by_label(keyword)) return *r;
    auto uri = guarded([&] { return g_.create_relation(keyword); });
    report_.created_entities.push_back(uri);
    return uri;
  }

  kg::Uri assert_statement(const kg::Uri& s, const kg::Uri& p, kg::Object o, std::optional<kg::Uri> scope,
                           std::vector<kg::Qualifier> qualifiers) {
    auto uri = guarded([&] { return g_.assert_statement(s, p, std::move(o), scope, std::move(qualifiers)); });
    report_.asserted_statements.push_back(uri);
    return uri;
  }

  void record_creation(const kg::Uri& item) {
    report_.created_entities.push_back(item);
    created_.insert(item);
    auto uri = guarded([&] {
      return g_.assert_statement(item, *g_.builtin("has_source_snippet"), kg::Literal::integer(snippet_));
    });
    report_.provenance_statements.push_back(uri);
  }

  void bind(const std::string& name, const kg::Uri& uri) {
    if (name.empty() || ambiguous_.count(name)) return;
    auto [it, inserted] = bindings_.emplace(name, uri);
    if (!inserted && it->second != uri) {
      bindings_.erase(it);
      ambiguous_.insert(name);
    }
  }

  kg::Uri new_term(const std::string& label) {
    if (auto it = bindings_.find(label); it != bindings_.end()) {
      warn("RepeatedNewTerm", "\"" + label + "\" was already introduced; quote a term only once");
      return it->second;
    }
    if (auto existing = g_.item_by_label(label)) {
      warn("ExistingTerm", "\"" + label + "\" already exists in the graph as " + existing->str() + "; reusing it");
      bind(label, *existing);
      bind(text::identifier_of(label), *existing);
      return *existing;
    }
    kg::ItemSpec spec;
    spec.label = label;
    spec.provenance = snippet_;
    auto uri = guarded([&] { return g_.create_item(std::move(spec)); });
    record_creation(uri);
    bind(label, uri);
    bind(text::identifier_of(label), uri);
    return uri;
  }

  kg::Uri node(const Term& term) {
    if (const auto* nt = std::get_if<fnl::NewTerm>(&term)) return new_term(nt->label);
    if (const auto* r = std::get_if<fnl::Reference>(&term); r && ambiguous_.count(r->name)) {
      fail("AmbiguousReference", "'" + r->name + "' was bound to more than one quoted term in this compilation");
    }
    return guarded([&] { return resolve_term(term, g_, bindings_); });
  }

  kg::Literal number(const std::string& text) {
    if (text.find('.') != std::string::npos) return kg::Literal::decimal(text);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) fail("InvalidTerm", "number out of range: " + text);
    return kg::Literal::integer(value);
  }

  kg::Object object(const Term& term, fnl::ObjectKind kind) {
    if (const auto* s = std::get_if<fnl::StringLiteral>(&term)) return kg::Literal::string(s->value);
    if (const auto* n = std::get_if<fnl::NumberLiteral>(&term)) return number(n->text);
    if (const auto* m = std::get_if<fnl::Math>(&term); m && kind == fnl::ObjectKind::Math) {
      return kg::Literal::string(m->latex);
    }
    return node(term);
  }

  fnl::ObjectKind kind_of(const std::string& predicate) const {
    const auto* info = vocab_.find(predicate);
    return info ? info->object : fnl::ObjectKind::Any;
  }

  void register_attribute(const Statement& st, const kg::Uri& subject) {
    const bool notation = st.predicate == "has_notation";
    if (!notation && st.predicate != "has_description") return;
    std::string value;
    if (const auto* m = std::get_if<fnl::Math>(&*st.object)) {
      value = m->latex;
    } else if (const auto* s = std::get_if<fnl::StringLiteral>(&*st.object)) {
      value = s->value;
    } else {
      return;
    }
    const auto* item = g_.find_item(subject);
    if (!item) return;
    const auto& current = notation ? item->notation : item->description;
    if (!created_.count(subject)) {
      warn("AttributeNotRegistered", "'" + item->label + "' was not created in this compilation; its " +
                                         (notation ? "notation" : "description") + " attribute is left unchanged");
      return;
    }
    if (current) {
      warn("AttributeNotRegistered", "'" + item->label + "' already has a " + (notation ? "notation" : "description") +
                                         "; keeping the first one");
      return;
    }
    guarded([&] {
      if (notation) {
        g_.set_notation(subject, value);
      } else {
        g_.set_description(subject, value);
      }
      return 0;
    });
    if (notation) bind("$" + text::normalize_math(value), subject);
  }

  void statement(const Statement& st, std::optional<kg::Uri> scope) {
    line_ = st.source_line;
    if (st.is_scope()) fail("ScopeKeywordMisuse", "'" + st.predicate + ":' must be nested under a theorem statement");
    if (st.is_qualifier()) fail("ScopeKeywordMisuse", "qualifier '" + st.predicate + ":' has no statement to qualify");
    auto subject = node(*st.subject);
    auto predicate = relation(st.predicate);
    auto obj = object(*st.object, kind_of(st.predicate));
    register_attribute(st, subject);

    std::vector<kg::Qualifier> qualifiers;
    bool has_scopes = false;
    for (const auto& child : st.children) {
      line_ = child.source_line;
      if (child.is_scope()) {
        has_scopes = true;
        continue;
      }
      if (!child.is_qualifier()) fail("ScopeKeywordMisuse", "only qualifiers and scope keywords may be nested here");
      auto rel = relation(child.predicate);
      qualifiers.push_back({rel, object(*child.object, kind_of(child.predicate))});
    }
    qualifiers.push_back(provenance());
    line_ = st.source_line;
    assert_statement(subject, predicate, std::move(obj), scope, std::move(qualifiers));
    if (has_scopes) theorem(st, subject);
  }

  void theorem(const Statement& st, const kg::Uri& thm) {
    if (!names_theorem_kind(st, vocab_)) {
      fail("ScopeKeywordMisuse", "scope keywords need an 'is_a: <theorem kind>' statement as parent");
    }
    const auto* item = g_.find_item(thm);
    if (!item || item->is_scope_item()) fail("ScopeKeywordMisuse", "a theorem must be an ordinary item");
    const std::string thm_label = item->label;
    std::set<kg::ScopeKind> seen;
    for (const auto& child : st.children) {
      if (!child.is_scope()) continue;
      line_ = child.source_line;
      auto kind = *kg::scope_kind_from_string(child.predicate);
      if (!seen.insert(kind).second || g_.scope_of(thm, kind)) {
        fail("DuplicateScope", "'" + thm_label + "' already has a " + child.predicate + " scope");
      }
      if (child.children.empty()) fail("EmptyScope", "'" + child.predicate + ":' contains no statements");
      auto label = thm_label + "/" + child.predicate;
      auto scope = guarded([&] { return g_.create_scope_item(thm, kind, label, snippet_); });
      record_creation(scope);
      assert_statement(thm, *g_.builtin("has_scope"), scope, std::nullopt, {provenance()});
      for (const auto& inner : child.children) statement(inner, scope);
    }
    line_ = st.source_line;
    std::vector<std::string> missing;
    for (auto kind : {kg::ScopeKind::Setup, kg::ScopeKind::Premise, kg::ScopeKind::Assertion}) {
      if (!g_.scope_of(thm, kind)) missing.emplace_back(kg::to_string(kind));
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      warn("PartialTheorem", "'" + thm_label + "' has no " + list + " scope yet");
    }
  }

  kg::KnowledgeGraph& g_;
  const fnl::Vocabulary& vocab_;
  CompileReport& report_;
  Bindings bindings_;
  std::set<std::string, std::less<>> ambiguous_;
  std::set<kg::Uri> created_;
  std::map<std::string, std::uint32_t, std::less<>> introduced_;
  std::uint32_t snippet_ = 0;
  std::size_t line_ = 0;
};

}  // namespace

CompileError::CompileError(std::string code, std::uint32_t snippet, std::size_t line, const std::string& message)
    : Error(std::move(code), message), snippet_(snippet), line_(line) {}

kg::Uri resolve_term(const fnl::Term& term, const kg::KnowledgeGraph& graph, const Bindings& bindings) {
  if (const auto* r = std::get_if<fnl::Reference>(&term)) {
    if (auto it = bindings.find(r->name); it != bindings.end()) return it->second;
    if (auto uri = graph.item_by_label(r->name)) return *uri;
    std::vector<kg::Uri> hits;
    for (const auto& [uri, entity] : graph.entities()) {
      const auto* item = std::get_if<kg::Item>(&entity);
      if (item && !item->is_scope_item() && text::identifier_of(item->label) == r->name) hits.push_back(uri);
    }
    if (hits.size() == 1) return hits[0];
    if (hits.size() > 1) {
      throw CompileError("AmbiguousReference", 0, 0,
                         "'" + r->name + "' matches several items (" + hits[0].str() + ", " + hits[1].str() + ")");
    }
    throw CompileError("UnresolvedReference", 0, 0,
                       "'" + r->name + "' matches no item; quote it to introduce a new term");
  }
  if (const auto* m = std::get_if<fnl::Math>(&term)) {
    auto key = text::normalize_math(m->latex);
    if (auto it = bindings.find("$" + key); it != bindings.end()) return it->second;
    auto hits = graph.items_by_notation(m->latex);
    if (hits.size() == 1) return hits[0];
    if (hits.size() > 1) {
      throw CompileError("AmbiguousNotation", 0, 0,
                         "'$" + m->latex + "$' is the notation of several items (" + hits[0].str() + ", " +
                             hits[1].str() + ")");
    }
    throw CompileError("UnresolvedReference", 0, 0, "'$" + m->latex + "$' is not the notation of any item");
  }
  throw CompileError("InvalidTerm", 0, 0, std::string("a ") + term_kind(term) + " cannot name an entity");
}

CompileReport compile(const fnl::Document& doc, kg::KnowledgeGraph& graph, const fnl::Vocabulary& vocab) {
  CompileReport report;
  kg::KnowledgeGraph work = graph;
  Unit unit(work, vocab, report);
  unit.prescan(doc);
  for (const auto& [id, block] : doc.blocks) unit.block(id, block);
  graph = std::move(work);
  return report;
}

std::string format_report(const CompileReport& report, const kg::KnowledgeGraph& graph) {
  std::string out;
  out += "created entities: " + std::to_string(report.created_entities.size()) + "\n";
  out += "asserted statements: " + std::to_string(report.asserted_statements.size()) + "\n";
  out += "provenance statements: " + std::to_string(report.provenance_statements.size()) + "\n";
  out += "warnings: " + std::to_string(report.diagnostics.size()) + "\n";
  for (const auto& uri : report.created_entities) {
    if (const auto* item = graph.find_item(uri)) {
      out += "E\t" + uri.str() + "\t" + (item->is_scope_item() ? "scope" : "item") + "\t" + text::escape_field(item->label) + "\n";
    } else if (const auto* rel = graph.find_relation(uri)) {
      out += "E\t" + uri.str() + "\trelation\t" + text::escape_field(rel->label) + "\n";
    }
  }
  for (const auto& uri : report.asserted_statements) {
    if (const auto* st = graph.find_statement(uri)) out += "S\t" + kg::format_statement(*st) + "\n";
  }
  for (const auto& d : report.diagnostics) out += fnl::format_diagnostic(d) + "\n";
  return out;
}

}  // namespace semforge::compiler
