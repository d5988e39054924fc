#pragma once

// Knowledge graph of items, relations and reified statements.
//
// Every node and edge type carries a URI of the form kb://<ns>/<K><n> with
// K in {I, R, S}. Statements are first-class: their URIs may appear as the
// subject or object of other statements, and their qualifiers attach extra
// (relation, object) pairs without creating new statements.
//
// Mutating operations require exclusive access; const members may be used
// concurrently from several threads.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semforge/error.hpp"

namespace semforge::kg {

enum class UriKind { Item, Relation, Statement };

struct Uri {
  std::string ns = "main";
  UriKind kind = UriKind::Item;
  std::uint64_t sequence = 0;

  std::string str() const;
  static std::optional<Uri> parse(std::string_view text);

  friend auto operator<=>(const Uri&, const Uri&) = default;
  friend bool operator==(const Uri&, const Uri&) = default;
};

bool is_valid_namespace(std::string_view ns);

struct Decimal {
  std::string text;  // canonical decimal digits, e.g. "-0.25"
  friend auto operator<=>(const Decimal&, const Decimal&) = default;
  friend bool operator==(const Decimal&, const Decimal&) = default;
};

// The variant index is the kind tag: "42" and 42 never compare equal.
struct Literal {
  std::variant<std::string, std::int64_t, Decimal> value;

  static Literal string(std::string s) { return Literal{std::move(s)}; }
  static Literal integer(std::int64_t v) { return Literal{v}; }
  // Throws GraphError("BadLiteral") unless `text` matches -?[0-9]+\.[0-9]+.
  static Literal decimal(std::string text);

  // lit:str:"..." / lit:int:<n> / lit:dec:<d>
  std::string encode() const;
  static std::optional<Literal> decode(std::string_view text);

  friend auto operator<=>(const Literal&, const Literal&) = default;
  friend bool operator==(const Literal&, const Literal&) = default;
};

using Object = std::variant<Uri, Literal>;

std::string encode_object(const Object& o);
std::optional<Object> decode_object(std::string_view text);

enum class ScopeKind { Setup, Premise, Assertion };
std::string_view to_string(ScopeKind kind);
std::optional<ScopeKind> scope_kind_from_string(std::string_view s);

struct ScopeInfo {
  ScopeKind kind;
  Uri parent;
  friend bool operator==(const ScopeInfo&, const ScopeInfo&) = default;
};

struct Item {
  Uri uri;
  std::string label;
  std::optional<std::string> description;
  std::optional<std::string> notation;
  std::optional<std::uint32_t> provenance;  // defining snippet id
  std::optional<ScopeInfo> scope;           // set for scope items only

  bool is_scope_item() const { return scope.has_value(); }
  friend bool operator==(const Item&, const Item&) = default;
};

struct Relation {
  Uri uri;
  std::string label;
  bool builtin = false;
  friend bool operator==(const Relation&, const Relation&) = default;
};

using Entity = std::variant<Item, Relation>;

struct Qualifier {
  Uri relation;
  Object value;
  friend bool operator==(const Qualifier&, const Qualifier&) = default;
};

struct Statement {
  Uri uri;
  Uri subject;
  Uri predicate;
  Object object;
  std::optional<Uri> scope;
  std::vector<Qualifier> qualifiers;
  friend bool operator==(const Statement&, const Statement&) = default;
};

// A triple pattern; unset positions are wildcards.
struct Pattern {
  std::optional<Uri> subject;
  std::optional<Uri> predicate;
  std::optional<Object> object;
};

bool matches(const Statement& s, const Pattern& p);

class GraphError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Pre-registered relations, in URI order R1..R8.
inline constexpr std::string_view kBuiltinRelations[] = {
    "is_a",      "subclass_of", "has_label",          "has_description",
    "has_notation", "has_scope", "has_source_snippet", "has_part",
};

struct ItemSpec {
  std::string label;
  std::optional<std::string> description;
  std::optional<std::string> notation;
  std::optional<std::uint32_t> provenance;
};

class KnowledgeGraph {
 public:
  explicit KnowledgeGraph(std::string ns = "main");

  const std::string& ns() const { return ns_; }

  Uri create_item(std::string label, std::optional<std::string> description = std::nullopt,
                  std::optional<std::string> notation = std::nullopt);
  Uri create_item(ItemSpec spec);
  // At most one scope item per (parent, kind).
  Uri create_scope_item(const Uri& parent, ScopeKind kind, std::string label,
                        std::optional<std::uint32_t> provenance = std::nullopt);
  Uri create_relation(std::string label);

  Uri assert_statement(const Uri& subject, const Uri& predicate, Object object,
                       std::optional<Uri> scope = std::nullopt, std::vector<Qualifier> qualifiers = {});

  // Fill an attribute that is still unset; throws AttributeAlreadySet otherwise.
  void set_notation(const Uri& item, std::string notation);
  void set_description(const Uri& item, std::string description);

  // Statements matching every bound position, in assertion order.
  std::vector<Statement> query(const Pattern& pattern) const;

  const Item* find_item(const Uri& uri) const;
  const Relation* find_relation(const Uri& uri) const;
  const Statement* find_statement(const Uri& uri) const;
  bool contains(const Uri& uri) const;

  std::optional<Uri> item_by_label(std::string_view label) const;
  std::optional<Uri> relation_by_label(std::string_view label) const;
  std::optional<Uri> builtin(std::string_view label) const { return relation_by_label(label); }
  // Items whose normalized notation equals normalize_math(notation).
  std::vector<Uri> items_by_notation(std::string_view notation) const;
  std::optional<Uri> scope_of(const Uri& parent, ScopeKind kind) const;

  const std::map<Uri, Entity>& entities() const { return entities_; }
  const std::vector<Statement>& statements() const { return statements_; }
  std::size_t builtin_count() const;

  // Rebuilds every index from entity contents and compares with the live ones.
  bool indexes_consistent() const;

  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.ns_ == b.ns_ && a.entities_ == b.entities_ && a.statements_ == b.statements_;
  }

 private:
  friend KnowledgeGraph parse(std::string_view text);

  struct Indexes {
    std::map<std::string, Uri, std::less<>> item_labels;
    std::map<std::string, Uri, std::less<>> relation_labels;
    std::map<std::string, std::set<Uri>, std::less<>> notations;
    std::map<std::pair<Uri, ScopeKind>, Uri> scopes;
    friend bool operator==(const Indexes&, const Indexes&) = default;
  };

  Uri next_uri(UriKind kind);
  void check_label(std::string_view label, bool relation) const;
  void check_notation(std::string_view notation) const;
  void check_object(const Object& o, const char* role) const;
  void insert_item(Item item);
  void insert_relation(Relation rel);
  void insert_statement(Statement st);
  static void index_item(Indexes& idx, const Item& item);
  Indexes rebuild_indexes() const;

  std::string ns_;
  std::map<Uri, Entity> entities_;
  std::vector<Statement> statements_;
  std::map<Uri, std::size_t> statement_pos_;
  std::uint64_t last_item_ = 0;
  std::uint64_t last_relation_ = 0;
  std::uint64_t last_statement_ = 0;
  Indexes idx_;
};

// Line-oriented `.kgt` text. Builtin relations are implicit; output is
// entities in URI order followed by statements in URI order.
std::string serialize(const KnowledgeGraph& graph);
KnowledgeGraph parse(std::string_view text);

// The fields of a statement record after the leading "S\t".
std::string format_statement(const Statement& st);

// Imperative `.kgb` builder script; see docs/formats.md.
std::string export_builder_script(const KnowledgeGraph& graph);

}  // namespace semforge::kg
