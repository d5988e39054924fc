#pragma once

// Seeded random generators for property-style tests.

#include <random>
#include <string>
#include <vector>

#include "semforge/fnl.hpp"
#include "semforge/kgraph.hpp"

namespace semforge::testing {

inline std::string random_text(std::mt19937& rng, std::size_t max_len, bool allow_specials = true) {
  static const std::vector<std::string> pieces = {"a", "b", "x", "z", "Q", "7", " ", "_", "-", "ä", "∀", "{", "}",
                                                  "\\", "\"", "\t", "\n", "=", "#", ":", "lit:", "$"};
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, allow_specials ? pieces.size() - 1 : 5);
  std::string out;
  auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out += pieces[pick(rng)];
  return out;
}

inline kg::Literal random_literal(std::mt19937& rng) {
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return kg::Literal::string(random_text(rng, 12));
    case 1: return kg::Literal::integer(std::uniform_int_distribution<std::int64_t>(-100000, 100000)(rng));
    default: {
      auto whole = std::uniform_int_distribution<int>(-99, 99)(rng);
      auto frac = std::uniform_int_distribution<int>(0, 999)(rng);
      return kg::Literal::decimal(std::to_string(whole) + "." + std::to_string(frac));
    }
  }
}

// Builds a graph through the public API only. Roughly `statements`
// statements, with higher-order subjects/objects, literals, scopes and
// qualifiers mixed in.
inline kg::KnowledgeGraph random_graph(std::mt19937& rng, std::size_t statements, std::string ns = "main") {
  kg::KnowledgeGraph g(std::move(ns));
  std::vector<kg::Uri> items, relations, stmts, scopes;
  for (auto label : kg::kBuiltinRelations) relations.push_back(*g.relation_by_label(label));
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  auto pick = [&](const std::vector<kg::Uri>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };

  std::size_t n_items = 2 + statements / 3;
  for (std::size_t i = 0; i < n_items; ++i) {
    kg::ItemSpec spec;
    spec.label = "item " + std::to_string(i) + (chance(0.3) ? " " + random_text(rng, 4, false) : "");
    if (chance(0.4)) spec.description = random_text(rng, 20);
    if (chance(0.3)) spec.notation = "\\mathbb{" + std::string(1, static_cast<char>('A' + i % 26)) + "}_{" + std::to_string(i) + "}";
    if (chance(0.5)) spec.provenance = std::uniform_int_distribution<std::uint32_t>(1, 40)(rng);
    items.push_back(g.create_item(std::move(spec)));
  }
  for (std::size_t i = 0; i < 1 + statements / 20; ++i) relations.push_back(g.create_relation("rel_" + std::to_string(i)));
  for (std::size_t i = 0; i < items.size() / 5; ++i) {
    auto parent = items[i];
    for (auto kind : {kg::ScopeKind::Setup, kg::ScopeKind::Premise, kg::ScopeKind::Assertion}) {
      if (chance(0.5)) {
        scopes.push_back(g.create_scope_item(parent, kind, g.find_item(parent)->label + "::" + std::string(kg::to_string(kind))));
      }
    }
  }
  auto random_node = [&]() {
    if (!stmts.empty() && chance(0.15)) return pick(stmts);
    return pick(items);
  };
  auto random_object = [&]() -> kg::Object {
    if (chance(0.3)) return random_literal(rng);
    return random_node();
  };
  for (std::size_t i = 0; i < statements; ++i) {
    std::optional<kg::Uri> scope;
    if (!scopes.empty() && chance(0.2)) scope = pick(scopes);
    std::vector<kg::Qualifier> qualifiers;
    while (chance(0.15)) qualifiers.push_back({pick(relations), random_object()});
    stmts.push_back(g.assert_statement(random_node(), pick(relations), random_object(), scope, std::move(qualifiers)));
  }
  return g;
}

inline fnl::Term random_fnl_term(std::mt19937& rng, bool subject, fnl::ObjectKind kind) {
  static const std::vector<std::string> idents = {"vector_space", "subspace", "x1", "zero_vector", "field"};
  static const std::vector<std::string> labels = {"inner product", "Hilbert space", "U \"quoted\"", "a\\b", "ä-term"};
  static const std::vector<std::string> maths = {"\\mathbb{U}^\\perp", "x_{1}", "\\langle u, v \\rangle", "V"};
  auto pick = [&](const std::vector<std::string>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  int choice = std::uniform_int_distribution<int>(0, 3)(rng);
  if (!subject && kind == fnl::ObjectKind::Literal) {
    if (choice < 2) return fnl::StringLiteral{pick(labels)};
    return fnl::NumberLiteral{choice == 2 ? "42" : "-0.5"};
  }
  if (!subject && kind == fnl::ObjectKind::Math) return fnl::Math{pick(maths)};
  if (choice == 0) return fnl::Reference{pick(idents)};
  if (choice == 1) return fnl::NewTerm{pick(labels)};
  if (choice == 2) return fnl::Math{pick(maths)};
  if (!subject && kind == fnl::ObjectKind::Any) return fnl::NumberLiteral{"3"};
  return fnl::Reference{pick(idents)};
}

// A random well-formed FNL document over `vocab`.
inline fnl::Document random_fnl(std::mt19937& rng, const fnl::Vocabulary& vocab, std::size_t blocks) {
  std::vector<std::string> preds;
  for (const auto& [k, v] : vocab.predicates) preds.push_back(k);
  auto pick_pred = [&]() { return preds[std::uniform_int_distribution<std::size_t>(0, preds.size() - 1)(rng)]; };
  auto spo = [&](int depth) {
    fnl::Statement st;
    st.predicate = pick_pred();
    st.subject = random_fnl_term(rng, true, fnl::ObjectKind::Entity);
    st.object = random_fnl_term(rng, false, vocab.find(st.predicate)->object);
    st.depth = depth;
    return st;
  };
  fnl::Document doc;
  std::uint32_t id = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    id += std::uniform_int_distribution<std::uint32_t>(1, 3)(rng);
    auto& block = doc.blocks[id];
    auto n = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int i = 0; i < n; ++i) {
      auto st = spo(0);
      if (std::bernoulli_distribution(0.2)(rng)) {
        st.predicate = "is_a";
        st.object = fnl::Reference{"theorem"};
        for (auto kw : fnl::kScopeKeywords) {
          fnl::Statement scope;
          scope.predicate = std::string(kw);
          scope.depth = 1;
          scope.children.push_back(spo(2));
          st.children.push_back(std::move(scope));
        }
      } else if (std::bernoulli_distribution(0.2)(rng)) {
        fnl::Statement q;
        q.predicate = pick_pred();
        q.object = random_fnl_term(rng, false, vocab.find(q.predicate)->object);
        q.depth = 1;
        st.children.push_back(std::move(q));
      }
      block.push_back(std::move(st));
    }
  }
  return doc;
}

// Random delimited LaTeX: preamble, then snippets with increasing ids, odd
// line endings, comments that look almost like delimiters, and non-ASCII.
inline std::string random_delimited_latex(std::mt19937& rng) {
  static const std::vector<std::string> lines = {
      "Let $V$ be a vector space.",   "% just a comment",         "%!snippet",          "% !snippets 3",
      "  \\begin{theorem}",           "\\end{theorem}",           "Für alle $x \\in U$ gilt.", "",
      "\\[ x = y \\]",                "text with trailing space ", "\t% !snippet x",     "\\section{Intro}",
  };
  auto pick = [&] { return lines[rng() % lines.size()]; };
  auto eol = [&] { return (rng() % 5 == 0) ? std::string("\r\n") : std::string("\n"); };
  std::string out;
  for (unsigned i = rng() % 3; i > 0; --i) out += pick() + eol();
  std::uint32_t id = 0;
  unsigned n = 1 + rng() % 8;
  for (unsigned s = 0; s < n; ++s) {
    id += 1 + rng() % 4;
    std::string indent = (rng() % 4 == 0) ? "  " : "";
    out += indent + "% !snippet " + std::to_string(id) + eol();
    out += "Sentence " + std::to_string(s) + ".";
    for (unsigned i = rng() % 4; i > 0; --i) out += eol() + pick();
    if (s + 1 < n || rng() % 2) out += eol();
  }
  return out;
}

}  // namespace semforge::testing
