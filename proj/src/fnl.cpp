#include "semforge/fnl.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "semforge/text.hpp"

namespace semforge::fnl {

namespace {

bool is_ident_start(char c) { return c >= 'a' && c <= 'z'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view object_kind_name(ObjectKind k) {
  switch (k) {
    case ObjectKind::Entity: return "entity";
    case ObjectKind::Literal: return "literal";
    case ObjectKind::Math: return "math";
    case ObjectKind::Any: return "any";
  }
  return "?";
}

std::size_t scan_identifier(std::string_view s, std::size_t i) {
  if (i >= s.size() || !is_ident_start(s[i])) return i;
  while (i < s.size() && is_ident_char(s[i])) ++i;
  return i;
}

struct TermError {
  std::size_t column;  // 0-based offset within the scanned string
  std::string message;
};

enum class Role { Subject, Object };

// Scans one term starting at `i`. On success advances `i` past it.
std::variant<Term, TermError> scan_term(std::string_view s, std::size_t& i, Role role, ObjectKind kind) {
  const std::size_t start = i;
  if (i >= s.size()) return TermError{i, "missing term"};
  char c = s[i];
  if (c == '"') {
    std::size_t j = i + 1;
    while (j < s.size() && s[j] != '"') j += (s[j] == '\\') ? 2 : 1;
    if (j >= s.size()) return TermError{start, "unterminated quoted string"};
    auto value = text::unquote(s.substr(i, j + 1 - i));
    if (!value) return TermError{start, "bad escape in quoted string"};
    if (text::trim(*value).empty() || *value != text::trim(*value)) {
      return TermError{start, "quoted string must be nonempty without surrounding spaces"};
    }
    i = j + 1;
    if (role == Role::Object && kind == ObjectKind::Literal) return Term{StringLiteral{std::move(*value)}};
    if (role == Role::Object && kind == ObjectKind::Math) return TermError{start, "expected a $...$ math term"};
    return Term{NewTerm{std::move(*value)}};
  }
  if (c == '$') {
    std::size_t j = i + 1;
    while (j < s.size() && s[j] != '$') j += (s[j] == '\\') ? 2 : 1;
    if (j >= s.size()) return TermError{start, "unterminated math term"};
    auto latex = s.substr(i + 1, j - i - 1);
    if (text::trim(latex).empty()) return TermError{start, "empty math term"};
    if (!text::braces_balanced(latex)) return TermError{start, "unbalanced braces in math term"};
    i = j + 1;
    if (role == Role::Object && kind == ObjectKind::Literal) return TermError{start, "expected a literal"};
    return Term{Math{std::string(latex)}};
  }
  if (is_digit(c) || (c == '-' && i + 1 < s.size() && is_digit(s[i + 1]))) {
    std::size_t j = i + 1;
    while (j < s.size() && is_digit(s[j])) ++j;
    if (j < s.size() && s[j] == '.') {
      std::size_t frac = j + 1;
      while (frac < s.size() && is_digit(s[frac])) ++frac;
      if (frac == j + 1) return TermError{start, "malformed number"};
      j = frac;
    }
    if (role == Role::Subject) return TermError{start, "a number cannot be a subject"};
    if (kind != ObjectKind::Literal && kind != ObjectKind::Any) return TermError{start, "number not allowed here"};
    std::string number(s.substr(i, j - i));
    i = j;
    return Term{NumberLiteral{std::move(number)}};
  }
  if (is_ident_start(c)) {
    std::size_t j = scan_identifier(s, i);
    if (role == Role::Object && (kind == ObjectKind::Literal || kind == ObjectKind::Math)) {
      return TermError{start, std::string("expected a ") + std::string(object_kind_name(kind)) + " object"};
    }
    std::string name(s.substr(i, j - i));
    i = j;
    return Term{Reference{std::move(name)}};
  }
  return TermError{start, "malformed term"};
}

struct LineOutcome {
  std::optional<Statement> statement;
  std::optional<Diagnostic> error;
};

Diagnostic make_error(std::size_t line, std::size_t column, std::string code, std::string message) {
  return Diagnostic{Severity::Error, line, column, std::move(code), std::move(message)};
}

// `content` is the text after "- "; `col0` is its 1-based column.
LineOutcome parse_content(std::string_view content, std::size_t line, std::size_t col0, const Vocabulary& vocab) {
  LineOutcome out;
  auto fail = [&](std::size_t offset, std::string code, std::string message) {
    out.error = make_error(line, col0 + offset, std::move(code), std::move(message));
    return out;
  };
  content = text::trim_right(content);
  if (content.empty()) return fail(0, "MalformedTerm", "empty statement");

  // Predicate-first form: scope keyword or qualifier.
  std::size_t id_end = scan_identifier(content, 0);
  if (id_end > 0 && id_end < content.size() && content[id_end] == ':') {
    std::string keyword(content.substr(0, id_end));
    auto rest_start = id_end + 1;
    while (rest_start < content.size() && content[rest_start] == ' ') ++rest_start;
    auto rest = content.substr(rest_start);
    Statement st;
    st.predicate = keyword;
    st.source_line = line;
    if (is_scope_keyword(keyword)) {
      if (!rest.empty()) return fail(rest_start, "ScopeKeywordMisuse", "scope keyword '" + keyword + "' takes no object");
      out.statement = std::move(st);
      return out;
    }
    const auto* info = vocab.find(keyword);
    if (!info) return fail(0, "UnknownPredicate", "unknown predicate '" + keyword + "'");
    if (rest.empty()) return fail(id_end, "MalformedTerm", "qualifier '" + keyword + "' needs an object");
    std::size_t i = 0;
    auto term = scan_term(rest, i, Role::Object, info->object);
    if (auto* err = std::get_if<TermError>(&term)) return fail(rest_start + err->column, "MalformedTerm", err->message);
    if (i != rest.size()) return fail(rest_start + i, "MalformedTerm", "unexpected text after object");
    st.object = std::get<Term>(std::move(term));
    out.statement = std::move(st);
    return out;
  }

  Statement st;
  st.source_line = line;
  std::size_t i = 0;
  auto subject = scan_term(content, i, Role::Subject, ObjectKind::Entity);
  if (auto* err = std::get_if<TermError>(&subject)) return fail(err->column, "MalformedTerm", err->message);
  st.subject = std::get<Term>(std::move(subject));
  if (i >= content.size() || content[i] != ' ') return fail(i, "MalformedTerm", "expected a space after the subject");
  while (i < content.size() && content[i] == ' ') ++i;
  std::size_t pred_start = i;
  std::size_t pred_end = scan_identifier(content, i);
  if (pred_end == pred_start || pred_end >= content.size() || content[pred_end] != ':') {
    return fail(pred_start, "MalformedTerm", "expected 'predicate:' after the subject");
  }
  st.predicate = std::string(content.substr(pred_start, pred_end - pred_start));
  if (is_scope_keyword(st.predicate)) {
    return fail(pred_start, "ScopeKeywordMisuse", "scope keyword '" + st.predicate + "' used as a predicate");
  }
  const auto* info = vocab.find(st.predicate);
  if (!info) return fail(pred_start, "UnknownPredicate", "unknown predicate '" + st.predicate + "'");
  i = pred_end + 1;
  while (i < content.size() && content[i] == ' ') ++i;
  auto object = scan_term(content, i, Role::Object, info->object);
  if (auto* err = std::get_if<TermError>(&object)) return fail(err->column, "MalformedTerm", err->message);
  if (i != content.size()) return fail(i, "MalformedTerm", "unexpected text after object");
  st.object = std::get<Term>(std::move(object));
  out.statement = std::move(st);
  return out;
}

std::optional<std::uint32_t> parse_header(std::string_view line, bool& is_header) {
  constexpr std::string_view kPrefix = "## snippet";
  auto rest = line.substr(std::min(line.size(), kPrefix.size()));
  is_header = text::starts_with(line, kPrefix) && (rest.empty() || rest[0] == ' ');
  if (!is_header || rest.empty()) return std::nullopt;
  rest = text::trim(rest);
  if (rest.empty() || !std::all_of(rest.begin(), rest.end(), is_digit)) return std::nullopt;
  std::uint32_t id = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), id);
  if (ec != std::errc{} || id == 0) return std::nullopt;
  return id;
}

ParseResult parse_impl(std::string_view input, const Vocabulary& vocab, std::optional<std::uint32_t> implicit_block) {
  ParseResult result;
  std::set<std::uint32_t> seen;

  struct Current {
    std::uint32_t id = 0;
    bool valid = false;   // false: lines are swallowed (bad or duplicate header)
    bool failed = false;
    Block block;
    std::vector<Statement*> path;
  };
  std::optional<Current> cur;

  auto finish = [&]() {
    if (!cur || !cur->valid) return;
    if (cur->failed) {
      result.rejected_blocks.push_back(cur->id);
    } else {
      result.document.blocks.emplace(cur->id, std::move(cur->block));
    }
    cur.reset();
  };
  auto open = [&](std::uint32_t id, std::size_t line) {
    finish();
    cur.emplace();
    cur->id = id;
    if (!seen.insert(id).second) {
      result.diagnostics.push_back(make_error(line, 1, "DuplicateBlock", "duplicate block for snippet " + std::to_string(id)));
      return;
    }
    cur->valid = true;
  };

  if (implicit_block) open(*implicit_block, 0);

  auto lines = text::split(input, '\n');
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    std::string_view line = lines[n];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;

    bool is_header = false;
    auto header_id = parse_header(line, is_header);
    if (is_header && implicit_block) {
      if (header_id != implicit_block) {
        result.diagnostics.push_back(make_error(line_no, 1, "BadHeader",
                                                "response header does not name snippet " + std::to_string(*implicit_block)));
        if (cur) cur->failed = true;
      }
      continue;
    }
    if (is_header) {
      if (!header_id) {
        finish();
        cur.emplace();  // swallow the malformed block
        result.diagnostics.push_back(make_error(line_no, 1, "BadHeader", "expected '## snippet <positive id>'"));
        continue;
      }
      open(*header_id, line_no);
      continue;
    }
    std::size_t first = line.find_first_not_of(' ');
    if (line[first] == '#') continue;  // comment

    if (!cur) {
      result.diagnostics.push_back(make_error(line_no, 1, "MissingSnippetHeader", "statement outside a '## snippet' block"));
      continue;
    }
    if (!cur->valid) continue;

    auto fail_line = [&](Diagnostic d) {
      result.diagnostics.push_back(std::move(d));
      cur->failed = true;
    };

    if (line[first] == '\t' || line.substr(0, first).find('\t') != std::string_view::npos) {
      fail_line(make_error(line_no, 1, "BadIndent", "tabs are not allowed in indentation"));
      continue;
    }
    if (first % 2 != 0) {
      fail_line(make_error(line_no, first + 1, "BadIndent", "indentation must be a multiple of two spaces"));
      continue;
    }
    const int depth = static_cast<int>(first / 2);
    if (line.substr(first, 2) != "- ") {
      fail_line(make_error(line_no, first + 1, "BadIndent", "expected '- ' bullet"));
      continue;
    }
    if (static_cast<std::size_t>(depth) > cur->path.size()) {
      fail_line(make_error(line_no, first + 1, "BadIndent", "indentation skips a nesting level"));
      continue;
    }
    auto outcome = parse_content(line.substr(first + 2), line_no, first + 3, vocab);
    Statement st;
    if (outcome.error) {
      fail_line(std::move(*outcome.error));
      st.source_line = line_no;  // placeholder keeps the tree shape for later lines
    } else {
      st = std::move(*outcome.statement);
    }
    st.depth = depth;
    cur->path.resize(static_cast<std::size_t>(depth));
    Statement* parent = depth == 0 ? nullptr : cur->path.back();
    if (!outcome.error && st.is_qualifier() && (!parent || !parent->subject)) {
      fail_line(make_error(line_no, first + 1, "OrphanQualifier", "a qualifier must be nested under a statement"));
    }
    auto& siblings = parent ? parent->children : cur->block;
    siblings.push_back(std::move(st));
    cur->path.push_back(&siblings.back());
  }
  finish();
  std::sort(result.rejected_blocks.begin(), result.rejected_blocks.end());
  return result;
}

void serialize_into(std::string& out, const Statement& st) {
  out.append(static_cast<std::size_t>(st.depth) * 2, ' ');
  out += "- ";
  out += canonical_line(st);
  out += '\n';
  for (const auto& child : st.children) serialize_into(out, child);
}

}  // namespace

bool is_scope_keyword(std::string_view word) {
  return std::find(std::begin(kScopeKeywords), std::end(kScopeKeywords), word) != std::end(kScopeKeywords);
}

const PredicateInfo* Vocabulary::find(std::string_view keyword) const {
  auto it = predicates.find(keyword);
  return it == predicates.end() ? nullptr : &it->second;
}

bool Vocabulary::is_theorem_kind(std::string_view identifier) const {
  return std::find(theorem_kinds.begin(), theorem_kinds.end(), identifier) != theorem_kinds.end();
}

std::string Vocabulary::describe() const {
  std::string out;
  for (const auto& [keyword, info] : predicates) {
    out += "- `" + keyword + ":` object kind " + std::string(object_kind_name(info.object));
    if (!info.doc.empty()) out += "; " + info.doc;
    out += '\n';
  }
  out += "- Scope keywords (children of a theorem-introducing statement only): ";
  for (std::size_t i = 0; i < std::size(kScopeKeywords); ++i) {
    if (i) out += ", ";
    out += "`" + std::string(kScopeKeywords[i]) + ":`";
  }
  out += '\n';
  out += "- Theorem kinds (objects of `is_a:` that may carry scope children): ";
  for (std::size_t i = 0; i < theorem_kinds.size(); ++i) {
    if (i) out += ", ";
    out += theorem_kinds[i];
  }
  out += '\n';
  return out;
}

std::string format_term(const Term& term) {
  struct Visitor {
    std::string operator()(const Reference& r) const { return r.name; }
    std::string operator()(const NewTerm& t) const { return text::quote(t.label); }
    std::string operator()(const Math& m) const { return "$" + m.latex + "$"; }
    std::string operator()(const StringLiteral& s) const { return text::quote(s.value); }
    std::string operator()(const NumberLiteral& n) const { return n.text; }
  };
  return std::visit(Visitor{}, term);
}

std::string format_diagnostic(const Diagnostic& d, std::string_view file) {
  std::string out;
  if (!file.empty()) out += std::string(file) + ':';
  out += std::to_string(d.line) + ':' + std::to_string(d.column) + ": ";
  out += d.severity == Severity::Error ? "error" : "warning";
  out += ": " + d.code + ": " + d.message;
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

ParseResult parse_fnl(std::string_view text, const Vocabulary& vocab) { return parse_impl(text, vocab, std::nullopt); }

ParseResult parse_block(std::string_view text, const Vocabulary& vocab, std::uint32_t snippet_id) {
  return parse_impl(text, vocab, snippet_id);
}

std::string canonical_line(const Statement& st) {
  if (st.is_scope()) return st.predicate + ":";
  if (st.is_qualifier()) return st.predicate + ": " + format_term(*st.object);
  return format_term(*st.subject) + ' ' + st.predicate + ": " + format_term(*st.object);
}

std::string serialize_block(const Block& block) {
  std::string out;
  for (const auto& st : block) serialize_into(out, st);
  return out;
}

std::string serialize_fnl(const Document& doc) {
  std::string out;
  bool first = true;
  for (const auto& [id, block] : doc.blocks) {
    if (!first) out += '\n';
    first = false;
    out += "## snippet " + std::to_string(id) + '\n';
    out += serialize_block(block);
  }
  return out;
}

std::size_t count_statements(const Block& block) {
  std::size_t n = 0;
  for (const auto& st : block) n += 1 + count_statements(st.children);
  return n;
}

std::size_t count_statements(const Document& doc) {
  std::size_t n = 0;
  for (const auto& [id, block] : doc.blocks) n += count_statements(block);
  return n;
}

namespace {

void flatten(const Block& block, std::vector<std::string>& out) {
  for (const auto& st : block) {
    out.push_back(std::string(static_cast<std::size_t>(st.depth) * 2, ' ') + canonical_line(st));
    flatten(st.children, out);
  }
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      row[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], row[j - 1]);
    }
    std::swap(prev, row);
  }
  return prev[b.size()];
}

}  // namespace

DiffSummary diff_summary(const Document& old_doc, const Document& new_doc) {
  DiffSummary out;
  std::set<std::uint32_t> ids;
  for (const auto& [id, b] : old_doc.blocks) ids.insert(id);
  for (const auto& [id, b] : new_doc.blocks) ids.insert(id);
  for (auto id : ids) {
    std::vector<std::string> a, b;
    if (auto it = old_doc.blocks.find(id); it != old_doc.blocks.end()) flatten(it->second, a);
    if (auto it = new_doc.blocks.find(id); it != new_doc.blocks.end()) flatten(it->second, b);
    std::size_t common = lcs_length(a, b);
    std::size_t deleted = a.size() - common;
    std::size_t inserted = b.size() - common;
    std::size_t paired = std::min(deleted, inserted);
    out.modified += paired;
    out.removed += deleted - paired;
    out.added += inserted - paired;
  }
  auto total = std::max<std::size_t>(1, count_statements(old_doc));
  out.intervention_rate = static_cast<double>(out.added + out.removed + out.modified) / static_cast<double>(total);
  return out;
}

}  // namespace semforge::fnl
