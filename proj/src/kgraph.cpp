#include "semforge/kgraph.hpp"

#include <algorithm>
#include <charconv>

#include "semforge/text.hpp"

namespace semforge::kg {

namespace {

constexpr std::string_view kScheme = "kb://";

char kind_letter(UriKind k) {
  switch (k) {
    case UriKind::Item: return 'I';
    case UriKind::Relation: return 'R';
    case UriKind::Statement: return 'S';
  }
  return '?';
}

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_decimal_text(std::string_view s) {
  if (!s.empty() && s.front() == '-') s.remove_prefix(1);
  auto dot = s.find('.');
  if (dot == std::string_view::npos) return false;
  return is_digits(s.substr(0, dot)) && is_digits(s.substr(dot + 1));
}

}  // namespace

bool is_valid_namespace(std::string_view ns) {
  if (ns.empty()) return false;
  return std::all_of(ns.begin(), ns.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return text::is_ascii_alpha(u) || (u >= '0' && u <= '9') || c == '_' || c == '-' || c == '.';
  });
}

std::string Uri::str() const {
  std::string out(kScheme);
  out += ns;
  out += '/';
  out += kind_letter(kind);
  out += std::to_string(sequence);
  return out;
}

std::optional<Uri> Uri::parse(std::string_view s) {
  if (!text::starts_with(s, kScheme)) return std::nullopt;
  s.remove_prefix(kScheme.size());
  auto slash = s.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  Uri uri;
  uri.ns = std::string(s.substr(0, slash));
  if (!is_valid_namespace(uri.ns)) return std::nullopt;
  auto rest = s.substr(slash + 1);
  if (rest.size() < 2) return std::nullopt;
  switch (rest[0]) {
    case 'I': uri.kind = UriKind::Item; break;
    case 'R': uri.kind = UriKind::Relation; break;
    case 'S': uri.kind = UriKind::Statement; break;
    default: return std::nullopt;
  }
  auto digits = rest.substr(1);
  if (!is_digits(digits) || digits[0] == '0') return std::nullopt;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), uri.sequence);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return uri;
}

Literal Literal::decimal(std::string text) {
  if (!is_decimal_text(text)) throw GraphError("BadLiteral", "not a decimal literal: " + text);
  return Literal{Decimal{std::move(text)}};
}

std::string Literal::encode() const {
  struct Visitor {
    std::string operator()(const std::string& s) const { return "lit:str:" + text::quote(s); }
    std::string operator()(std::int64_t v) const { return "lit:int:" + std::to_string(v); }
    std::string operator()(const Decimal& d) const { return "lit:dec:" + d.text; }
  };
  return std::visit(Visitor{}, value);
}

std::optional<Literal> Literal::decode(std::string_view s) {
  if (text::starts_with(s, "lit:str:")) {
    auto v = text::unquote(s.substr(8));
    if (!v) return std::nullopt;
    return Literal::string(std::move(*v));
  }
  if (text::starts_with(s, "lit:int:")) {
    auto d = s.substr(8);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(d.data(), d.data() + d.size(), v);
    if (d.empty() || ec != std::errc{} || ptr != d.data() + d.size()) return std::nullopt;
    if (std::to_string(v) != d) return std::nullopt;  // reject "+1", "007"
    return Literal::integer(v);
  }
  if (text::starts_with(s, "lit:dec:")) {
    auto d = s.substr(8);
    if (!is_decimal_text(d)) return std::nullopt;
    return Literal{Decimal{std::string(d)}};
  }
  return std::nullopt;
}

std::string encode_object(const Object& o) {
  if (const auto* u = std::get_if<Uri>(&o)) return u->str();
  return std::get<Literal>(o).encode();
}

std::optional<Object> decode_object(std::string_view s) {
  if (text::starts_with(s, "lit:")) {
    auto lit = Literal::decode(s);
    if (!lit) return std::nullopt;
    return Object{std::move(*lit)};
  }
  auto uri = Uri::parse(s);
  if (!uri) return std::nullopt;
  return Object{std::move(*uri)};
}

std::string_view to_string(ScopeKind kind) {
  switch (kind) {
    case ScopeKind::Setup: return "setup";
    case ScopeKind::Premise: return "premise";
    case ScopeKind::Assertion: return "assertion";
  }
  return "?";
}

std::optional<ScopeKind> scope_kind_from_string(std::string_view s) {
  if (s == "setup") return ScopeKind::Setup;
  if (s == "premise") return ScopeKind::Premise;
  if (s == "assertion") return ScopeKind::Assertion;
  return std::nullopt;
}

bool matches(const Statement& s, const Pattern& p) {
  if (p.subject && s.subject != *p.subject) return false;
  if (p.predicate && s.predicate != *p.predicate) return false;
  if (p.object && s.object != *p.object) return false;
  return true;
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error("ParseError", "line " + std::to_string(line) + ": " + message), line_(line) {}

KnowledgeGraph::KnowledgeGraph(std::string ns) : ns_(std::move(ns)) {
  if (!is_valid_namespace(ns_)) throw GraphError("BadNamespace", "invalid namespace '" + ns_ + "'");
  for (auto label : kBuiltinRelations) {
    insert_relation(Relation{next_uri(UriKind::Relation), std::string(label), true});
  }
}

std::size_t KnowledgeGraph::builtin_count() const { return std::size(kBuiltinRelations); }

Uri KnowledgeGraph::next_uri(UriKind kind) {
  switch (kind) {
    case UriKind::Item: return Uri{ns_, kind, last_item_ + 1};
    case UriKind::Relation: return Uri{ns_, kind, last_relation_ + 1};
    case UriKind::Statement: return Uri{ns_, kind, last_statement_ + 1};
  }
  return {};
}

void KnowledgeGraph::check_label(std::string_view label, bool relation) const {
  if (text::trim(label).empty()) throw GraphError("EmptyLabel", "label must not be empty");
  if (label != text::trim(label)) {
    throw GraphError("BadLabel", "label has leading or trailing whitespace: '" + std::string(label) + "'");
  }
  const auto& index = relation ? idx_.relation_labels : idx_.item_labels;
  if (auto it = index.find(label); it != index.end()) {
    throw GraphError("DuplicateLabel", "label '" + std::string(label) + "' already bound to " + it->second.str());
  }
}

void KnowledgeGraph::check_notation(std::string_view notation) const {
  if (text::trim(notation).empty()) throw GraphError("InvalidNotation", "notation must not be empty");
  if (!text::braces_balanced(notation)) {
    throw GraphError("InvalidNotation", "notation has unbalanced braces: " + std::string(notation));
  }
}

void KnowledgeGraph::index_item(Indexes& idx, const Item& item) {
  idx.item_labels.emplace(item.label, item.uri);
  if (item.notation) idx.notations[text::normalize_math(*item.notation)].insert(item.uri);
  if (item.scope) idx.scopes.emplace(std::make_pair(item.scope->parent, item.scope->kind), item.uri);
}

void KnowledgeGraph::insert_item(Item item) {
  check_label(item.label, false);
  if (item.notation) check_notation(*item.notation);
  if (item.scope) {
    const Item* parent = find_item(item.scope->parent);
    if (!parent) throw GraphError("UnknownEntity", "unknown scope parent " + item.scope->parent.str());
    if (parent->is_scope_item()) throw GraphError("InvalidScope", "scope parent is itself a scope item");
    if (scope_of(item.scope->parent, item.scope->kind)) {
      throw GraphError("DuplicateScope", std::string(to_string(item.scope->kind)) + " scope already exists for " +
                                             item.scope->parent.str());
    }
  }
  last_item_ = std::max(last_item_, item.uri.sequence);
  index_item(idx_, item);
  auto uri = item.uri;
  entities_.emplace(uri, std::move(item));
}

void KnowledgeGraph::insert_relation(Relation rel) {
  check_label(rel.label, true);
  last_relation_ = std::max(last_relation_, rel.uri.sequence);
  idx_.relation_labels.emplace(rel.label, rel.uri);
  auto uri = rel.uri;
  entities_.emplace(uri, std::move(rel));
}

void KnowledgeGraph::check_object(const Object& o, const char* role) const {
  if (const auto* u = std::get_if<Uri>(&o)) {
    if (!contains(*u)) throw GraphError("UnknownEntity", std::string("unknown ") + role + " " + u->str());
    if (u->kind == UriKind::Relation) {
      throw GraphError("InvalidObject", std::string(role) + " must be an item or statement: " + u->str());
    }
  }
}

void KnowledgeGraph::insert_statement(Statement st) {
  if (!contains(st.subject)) throw GraphError("UnknownEntity", "unknown subject " + st.subject.str());
  if (st.subject.kind == UriKind::Relation) {
    throw GraphError("InvalidSubject", "subject must be an item or statement: " + st.subject.str());
  }
  if (!contains(st.predicate)) throw GraphError("UnknownEntity", "unknown predicate " + st.predicate.str());
  if (!find_relation(st.predicate)) {
    throw GraphError("PredicateNotRelation", "predicate is not a relation: " + st.predicate.str());
  }
  check_object(st.object, "object");
  if (st.scope) {
    const Item* scope = find_item(*st.scope);
    if (!scope || !scope->is_scope_item()) throw GraphError("InvalidScope", "not a scope item: " + st.scope->str());
  }
  for (const auto& q : st.qualifiers) {
    if (!contains(q.relation)) throw GraphError("UnknownEntity", "unknown qualifier relation " + q.relation.str());
    if (!find_relation(q.relation)) {
      throw GraphError("PredicateNotRelation", "qualifier relation is not a relation: " + q.relation.str());
    }
    check_object(q.value, "qualifier value");
  }
  last_statement_ = std::max(last_statement_, st.uri.sequence);
  statement_pos_.emplace(st.uri, statements_.size());
  statements_.push_back(std::move(st));
}

Uri KnowledgeGraph::create_item(std::string label, std::optional<std::string> description,
                                std::optional<std::string> notation) {
  return create_item(ItemSpec{std::move(label), std::move(description), std::move(notation), std::nullopt});
}

Uri KnowledgeGraph::create_item(ItemSpec spec) {
  Item item{next_uri(UriKind::Item), std::move(spec.label), std::move(spec.description), std::move(spec.notation),
            spec.provenance, std::nullopt};
  auto uri = item.uri;
  insert_item(std::move(item));
  return uri;
}

Uri KnowledgeGraph::create_scope_item(const Uri& parent, ScopeKind kind, std::string label,
                                      std::optional<std::uint32_t> provenance) {
  Item item{next_uri(UriKind::Item), std::move(label), std::nullopt, std::nullopt, provenance, ScopeInfo{kind, parent}};
  auto uri = item.uri;
  insert_item(std::move(item));
  return uri;
}

Uri KnowledgeGraph::create_relation(std::string label) {
  Relation rel{next_uri(UriKind::Relation), std::move(label), false};
  auto uri = rel.uri;
  insert_relation(std::move(rel));
  return uri;
}

Uri KnowledgeGraph::assert_statement(const Uri& subject, const Uri& predicate, Object object,
                                     std::optional<Uri> scope, std::vector<Qualifier> qualifiers) {
  Statement st{next_uri(UriKind::Statement), subject, predicate, std::move(object), std::move(scope),
               std::move(qualifiers)};
  auto uri = st.uri;
  insert_statement(std::move(st));
  return uri;
}

void KnowledgeGraph::set_notation(const Uri& uri, std::string notation) {
  auto it = entities_.find(uri);
  auto* item = it == entities_.end() ? nullptr : std::get_if<Item>(&it->second);
  if (!item) throw GraphError("UnknownEntity", "unknown item " + uri.str());
  if (item->notation) throw GraphError("AttributeAlreadySet", "notation already set for " + uri.str());
  check_notation(notation);
  idx_.notations[text::normalize_math(notation)].insert(uri);
  item->notation = std::move(notation);
}

void KnowledgeGraph::set_description(const Uri& uri, std::string description) {
  auto it = entities_.find(uri);
  auto* item = it == entities_.end() ? nullptr : std::get_if<Item>(&it->second);
  if (!item) throw GraphError("UnknownEntity", "unknown item " + uri.str());
  if (item->description) throw GraphError("AttributeAlreadySet", "description already set for " + uri.str());
  item->description = std::move(description);
}

std::vector<Statement> KnowledgeGraph::query(const Pattern& pattern) const {
  if (pattern.subject && !contains(*pattern.subject)) {
    throw GraphError("UnknownEntity", "unknown subject " + pattern.subject->str());
  }
  if (pattern.predicate && !contains(*pattern.predicate)) {
    throw GraphError("UnknownEntity", "unknown predicate " + pattern.predicate->str());
  }
  if (pattern.object) {
    if (const auto* u = std::get_if<Uri>(&*pattern.object); u && !contains(*u)) {
      throw GraphError("UnknownEntity", "unknown object " + u->str());
    }
  }
  std::vector<Statement> out;
  for (const auto& st : statements_) {
    if (matches(st, pattern)) out.push_back(st);
  }
  return out;
}

const Item* KnowledgeGraph::find_item(const Uri& uri) const {
  auto it = entities_.find(uri);
  return it == entities_.end() ? nullptr : std::get_if<Item>(&it->second);
}

const Relation* KnowledgeGraph::find_relation(const Uri& uri) const {
  auto it = entities_.find(uri);
  return it == entities_.end() ? nullptr : std::get_if<Relation>(&it->second);
}

const Statement* KnowledgeGraph::find_statement(const Uri& uri) const {
  auto it = statement_pos_.find(uri);
  return it == statement_pos_.end() ? nullptr : &statements_[it->second];
}

bool KnowledgeGraph::contains(const Uri& uri) const {
  if (uri.kind == UriKind::Statement) return statement_pos_.count(uri) != 0;
  return entities_.count(uri) != 0;
}

std::optional<Uri> KnowledgeGraph::item_by_label(std::string_view label) const {
  auto it = idx_.item_labels.find(label);
  if (it == idx_.item_labels.end()) return std::nullopt;
  return it->second;
}

std::optional<Uri> KnowledgeGraph::relation_by_label(std::string_view label) const {
  auto it = idx_.relation_labels.find(label);
  if (it == idx_.relation_labels.end()) return std::nullopt;
  return it->second;
}

std::vector<Uri> KnowledgeGraph::items_by_notation(std::string_view notation) const {
  auto it = idx_.notations.find(text::normalize_math(notation));
  if (it == idx_.notations.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::optional<Uri> KnowledgeGraph::scope_of(const Uri& parent, ScopeKind kind) const {
  auto it = idx_.scopes.find({parent, kind});
  if (it == idx_.scopes.end()) return std::nullopt;
  return it->second;
}

KnowledgeGraph::Indexes KnowledgeGraph::rebuild_indexes() const {
  Indexes idx;
  for (const auto& [uri, entity] : entities_) {
    if (const auto* item = std::get_if<Item>(&entity)) {
      index_item(idx, *item);
    } else {
      const auto& rel = std::get<Relation>(entity);
      idx.relation_labels.emplace(rel.label, rel.uri);
    }
  }
  return idx;
}

bool KnowledgeGraph::indexes_consistent() const { return rebuild_indexes() == idx_; }

}  // namespace semforge::kg
