// Vocabulary loading; kept apart from fnl.cpp so only this unit pulls in toml++.

#include <toml.hpp>

#include "semforge/defaults.hpp"
#include "semforge/fnl.hpp"

namespace semforge::fnl {

namespace {

bool is_keyword(std::string_view s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  for (char c : s) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  }
  return true;
}

[[noreturn]] void bad(const std::string& message) { throw Error("BadVocabulary", message); }

}  // namespace

Vocabulary Vocabulary::from_toml(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    bad(std::string("vocabulary is not valid TOML: ") + std::string(e.description()));
  }
  Vocabulary vocab;
  if (auto* kinds = root["theorem_kinds"].as_array()) {
    for (const auto& node : *kinds) {
      auto value = node.value<std::string>();
      if (!value || !is_keyword(*value)) bad("theorem_kinds must be a list of identifiers");
      vocab.theorem_kinds.push_back(*value);
    }
  } else if (root.contains("theorem_kinds")) {
    bad("theorem_kinds must be an array");
  }
  auto* predicates = root["predicates"].as_table();
  if (!predicates || predicates->empty()) bad("missing [predicates] table");
  for (const auto& [key, node] : *predicates) {
    std::string keyword(key.str());
    if (!is_keyword(keyword)) bad("predicate '" + keyword + "' is not a lowercase identifier");
    if (is_scope_keyword(keyword)) bad("'" + keyword + "' is a scope keyword and cannot be a predicate");
    auto* entry = node.as_table();
    if (!entry) bad("predicate '" + keyword + "' must be a table");
    PredicateInfo info;
    auto object = (*entry)["object"].value_or(std::string("entity"));
    if (object == "entity") {
      info.object = ObjectKind::Entity;
    } else if (object == "literal") {
      info.object = ObjectKind::Literal;
    } else if (object == "math") {
      info.object = ObjectKind::Math;
    } else if (object == "any") {
      info.object = ObjectKind::Any;
    } else {
      bad("predicate '" + keyword + "' has unknown object kind '" + object + "'");
    }
    info.doc = (*entry)["doc"].value_or(std::string());
    vocab.predicates.emplace(std::move(keyword), std::move(info));
  }
  return vocab;
}

const Vocabulary& Vocabulary::builtin() {
  static const Vocabulary vocab = from_toml(defaults::vocabulary_toml());
  return vocab;
}

}  // namespace semforge::fnl
