// .kgt serialization and .kgb builder-script export.

#include <charconv>

#include "semforge/kgraph.hpp"
#include "semforge/text.hpp"

namespace semforge::kg {

namespace {

constexpr std::string_view kHeader = "kgt 1";

std::string entity_line(const Entity& entity) {
  std::string line = "E\t";
  if (const auto* item = std::get_if<Item>(&entity)) {
    line += item->uri.str() + "\titem\t" + text::escape_field(item->label);
    if (item->description) line += "\tdesc=" + text::escape_field(*item->description);
    if (item->notation) line += "\tnotation=" + text::escape_field(*item->notation);
    if (item->provenance) line += "\tsrc=" + std::to_string(*item->provenance);
    if (item->scope) {
      line += "\tscope=" + std::string(to_string(item->scope->kind));
      line += "\tparent=" + item->scope->parent.str();
    }
  } else {
    const auto& rel = std::get<Relation>(entity);
    line += rel.uri.str() + "\trelation\t" + text::escape_field(rel.label);
  }
  return line;
}

bool is_builtin(const Entity& entity) {
  const auto* rel = std::get_if<Relation>(&entity);
  return rel && rel->builtin;
}

}  // namespace

std::string format_statement(const Statement& st) {
  std::string out = st.uri.str() + '\t' + st.subject.str() + '\t' + st.predicate.str() + '\t' + encode_object(st.object);
  if (st.scope) out += "\tscope=" + st.scope->str();
  for (const auto& q : st.qualifiers) out += "\tq:" + q.relation.str() + '=' + encode_object(q.value);
  return out;
}

std::string serialize(const KnowledgeGraph& graph) {
  std::string out(kHeader);
  if (graph.ns() != "main") out += "\tns=" + graph.ns();
  out += '\n';
  for (const auto& [uri, entity] : graph.entities()) {
    if (is_builtin(entity)) continue;
    out += entity_line(entity);
    out += '\n';
  }
  for (const auto& st : graph.statements()) {
    out += "S\t";
    out += format_statement(st);
    out += '\n';
  }
  return out;
}

KnowledgeGraph parse(std::string_view input) {
  auto lines = text::split(input, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, "missing 'kgt 1' header");

  std::string ns = "main";
  {
    auto header = text::split(lines[0], '\t');
    if (header[0] != kHeader) throw ParseError(1, "expected header 'kgt 1'");
    for (std::size_t i = 1; i < header.size(); ++i) {
      if (!text::starts_with(header[i], "ns=")) throw ParseError(1, "unknown header field '" + std::string(header[i]) + "'");
      ns = std::string(header[i].substr(3));
    }
    if (!is_valid_namespace(ns)) throw ParseError(1, "invalid namespace '" + ns + "'");
  }

  KnowledgeGraph graph(ns);
  std::uint64_t last_seq[3] = {0, graph.builtin_count(), 0};

  auto expect_uri = [&](std::size_t line, std::string_view field, const char* what) {
    auto uri = Uri::parse(field);
    if (!uri) throw ParseError(line, std::string("malformed ") + what + " URI '" + std::string(field) + "'");
    if (uri->ns != ns) throw ParseError(line, "URI outside namespace '" + ns + "': " + uri->str());
    return *uri;
  };
  auto expect_object = [&](std::size_t line, std::string_view field) {
    auto obj = decode_object(field);
    if (!obj) throw ParseError(line, "malformed object '" + std::string(field) + "'");
    if (const auto* u = std::get_if<Uri>(&*obj); u && u->ns != ns) {
      throw ParseError(line, "URI outside namespace '" + ns + "': " + u->str());
    }
    return *obj;
  };
  auto check_order = [&](std::size_t line, const Uri& uri) {
    auto& last = last_seq[static_cast<int>(uri.kind)];
    if (uri.sequence <= last) throw ParseError(line, "URI out of order or reserved: " + uri.str());
    last = uri.sequence;
  };

  for (std::size_t n = 1; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    std::string_view line = lines[n];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto fields = text::split(line, '\t');
    try {
      if (fields[0] == "E") {
        if (fields.size() < 4) throw ParseError(line_no, "entity record needs uri, kind and label");
        auto uri = expect_uri(line_no, fields[1], "entity");
        auto label = text::unescape_field(fields[3]);
        if (!label) throw ParseError(line_no, "bad escape in label");
        if (fields[2] == "relation") {
          if (uri.kind != UriKind::Relation) throw ParseError(line_no, "relation record with non-relation URI " + uri.str());
          if (fields.size() != 4) throw ParseError(line_no, "relation records take no attributes");
          check_order(line_no, uri);
          graph.insert_relation(Relation{uri, std::move(*label), false});
          continue;
        }
        if (fields[2] != "item") throw ParseError(line_no, "unknown entity kind '" + std::string(fields[2]) + "'");
        if (uri.kind != UriKind::Item) throw ParseError(line_no, "item record with non-item URI " + uri.str());
        check_order(line_no, uri);
        Item item{uri, std::move(*label), std::nullopt, std::nullopt, std::nullopt, std::nullopt};
        std::optional<ScopeKind> scope_kind;
        std::optional<Uri> parent;
        for (std::size_t i = 4; i < fields.size(); ++i) {
          auto eq = fields[i].find('=');
          if (eq == std::string_view::npos) throw ParseError(line_no, "attribute without '=': " + std::string(fields[i]));
          auto key = fields[i].substr(0, eq);
          auto value = fields[i].substr(eq + 1);
          if (key == "desc" || key == "notation") {
            auto v = text::unescape_field(value);
            if (!v) throw ParseError(line_no, "bad escape in " + std::string(key));
            (key == "desc" ? item.description : item.notation) = std::move(*v);
          } else if (key == "src") {
            std::uint32_t id = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), id);
            if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size() || id == 0) {
              throw ParseError(line_no, "bad snippet id '" + std::string(value) + "'");
            }
            item.provenance = id;
          } else if (key == "scope") {
            scope_kind = scope_kind_from_string(value);
            if (!scope_kind) throw ParseError(line_no, "bad scope kind '" + std::string(value) + "'");
          } else if (key == "parent") {
            parent = expect_uri(line_no, value, "parent");
          } else {
            throw ParseError(line_no, "unknown attribute '" + std::string(key) + "'");
          }
        }
        if (scope_kind.has_value() != parent.has_value()) throw ParseError(line_no, "scope and parent must appear together");
        if (scope_kind) item.scope = ScopeInfo{*scope_kind, *parent};
        graph.insert_item(std::move(item));
      } else if (fields[0] == "S") {
        if (fields.size() < 5) throw ParseError(line_no, "statement record needs uri, subject, predicate and object");
        Statement st;
        st.uri = expect_uri(line_no, fields[1], "statement");
        if (st.uri.kind != UriKind::Statement) throw ParseError(line_no, "statement record with URI " + st.uri.str());
        st.subject = expect_uri(line_no, fields[2], "subject");
        st.predicate = expect_uri(line_no, fields[3], "predicate");
        st.object = expect_object(line_no, fields[4]);
        for (std::size_t i = 5; i < fields.size(); ++i) {
          auto f = fields[i];
          if (text::starts_with(f, "scope=")) {
            if (st.scope || !st.qualifiers.empty()) throw ParseError(line_no, "misplaced scope field");
            st.scope = expect_uri(line_no, f.substr(6), "scope");
          } else if (text::starts_with(f, "q:")) {
            auto eq = f.find('=');
            if (eq == std::string_view::npos) throw ParseError(line_no, "qualifier without '='");
            st.qualifiers.push_back(
                Qualifier{expect_uri(line_no, f.substr(2, eq - 2), "qualifier"), expect_object(line_no, f.substr(eq + 1))});
          } else {
            throw ParseError(line_no, "unknown statement field '" + std::string(f) + "'");
          }
        }
        check_order(line_no, st.uri);
        graph.insert_statement(std::move(st));
      } else {
        throw ParseError(line_no, "unknown record type '" + std::string(fields[0]) + "'");
      }
    } catch (const GraphError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return graph;
}

std::string export_builder_script(const KnowledgeGraph& graph) {
  std::string out = "# semforge builder script (kgb 1)\n";
  out += "# Replaying the directives in order against a fresh graph rebuilds it.\n";
  out += "namespace " + graph.ns() + "\n";
  for (const auto& [uri, entity] : graph.entities()) {
    if (is_builtin(entity)) continue;
    if (const auto* item = std::get_if<Item>(&entity)) {
      if (item->scope) {
        out += "scope " + uri.str() + ' ' + text::quote(item->label) + " kind=" + std::string(to_string(item->scope->kind)) +
               " parent=" + item->scope->parent.str();
      } else {
        out += "item " + uri.str() + ' ' + text::quote(item->label);
        if (item->description) out += " description=" + text::quote(*item->description);
        if (item->notation) out += " notation=" + text::quote(*item->notation);
      }
      if (item->provenance) out += " source=" + std::to_string(*item->provenance);
    } else {
      out += "relation " + uri.str() + ' ' + text::quote(std::get<Relation>(entity).label);
    }
    out += '\n';
  }
  for (const auto& st : graph.statements()) {
    out += "assert " + st.uri.str() + ' ' + st.subject.str() + ' ' + st.predicate.str() + ' ' + encode_object(st.object);
    if (st.scope) out += " scope=" + st.scope->str();
    for (const auto& q : st.qualifiers) out += " qualifier=" + q.relation.str() + ':' + encode_object(q.value);
    out += '\n';
  }
  return out;
}

}  // namespace semforge::kg
