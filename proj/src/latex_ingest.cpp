#include "semforge/latex_ingest.hpp"

#include <charconv>
#include <set>

#include "semforge/text.hpp"

namespace semforge::latex {

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t'; }
bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Reads `\begin{name}` / `\end{name}` at `pos` (pointing at the backslash).
std::optional<std::pair<std::string_view, std::size_t>> env_name(std::string_view s, std::size_t pos,
                                                                   std::string_view cmd) {
  if (s.substr(pos, cmd.size()) != cmd) return std::nullopt;
  std::size_t i = pos + cmd.size();
  if (i >= s.size() || s[i] != '{') return std::nullopt;
  auto close = s.find('}', i);
  if (close == std::string_view::npos) return std::nullopt;
  return std::make_pair(s.substr(i + 1, close - i - 1), close + 1);
}

struct MathScan {
  bool unbalanced_math = false;
  std::size_t sentences = 0;
  std::vector<std::string> env_problems;
};

// One pass over a snippet body that tracks math mode, comments and
// environments.
MathScan scan_body(std::string_view s) {
  MathScan out;
  enum class Mode { Text, Inline, Display, Paren, Bracket };
  Mode mode = Mode::Text;
  std::vector<std::string_view> envs;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '%') {
      auto nl = s.find('\n', i);
      if (nl == std::string_view::npos) break;
      i = nl;
      continue;
    }
    if (c == '\\') {
      if (i + 1 >= s.size()) break;
      char n = s[i + 1];
      if (n == '(' || n == '[') {
        if (mode != Mode::Text) out.unbalanced_math = true;
        mode = n == '(' ? Mode::Paren : Mode::Bracket;
        ++i;
        continue;
      }
      if (n == ')' || n == ']') {
        if (mode != (n == ')' ? Mode::Paren : Mode::Bracket)) out.unbalanced_math = true;
        mode = Mode::Text;
        ++i;
        continue;
      }
      if (auto b = env_name(s, i, "\\begin")) {
        if (b->first != "document") envs.push_back(b->first);
        i = b->second - 1;
        continue;
      }
      if (auto e = env_name(s, i, "\\end")) {
        if (e->first != "document") {
          if (envs.empty()) {
            out.env_problems.push_back("\\end{" + std::string(e->first) + "} without matching \\begin");
          } else if (envs.back() != e->first) {
            out.env_problems.push_back("\\end{" + std::string(e->first) + "} closes \\begin{" +
                                       std::string(envs.back()) + "}");
            envs.pop_back();
          } else {
            envs.pop_back();
          }
        }
        i = e->second - 1;
        continue;
      }
      ++i;  // escaped character or first letter of a control word
      continue;
    }
    if (c == '$') {
      bool dbl = i + 1 < s.size() && s[i + 1] == '$';
      if (mode == Mode::Text) {
        mode = dbl ? Mode::Display : Mode::Inline;
      } else if (mode == Mode::Inline && !dbl) {
        mode = Mode::Text;
      } else if (mode == Mode::Display && dbl) {
        mode = Mode::Text;
      } else {
        out.unbalanced_math = true;
        mode = Mode::Text;
      }
      if (dbl) ++i;
      continue;
    }
    if (mode == Mode::Text && (c == '.' || c == '!' || c == '?')) {
      if (i + 1 == s.size() || is_ws(s[i + 1])) ++out.sentences;
    }
  }
  if (mode != Mode::Text) out.unbalanced_math = true;
  for (auto env : envs) out.env_problems.push_back("\\begin{" + std::string(env) + "} is never closed");
  return out;
}

}  // namespace

std::string SourceDocument::reassemble() const {
  std::string out = preamble;
  for (const auto& s : snippets) {
    out += s.delimiter;
    out += s.body;
  }
  return out;
}

const Snippet* SourceDocument::find(std::uint32_t id) const {
  for (const auto& s : snippets) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::optional<std::uint32_t> parse_delimiter(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::size_t i = 0;
  while (i < line.size() && is_blank(line[i])) ++i;
  if (i >= line.size() || line[i] != '%') return std::nullopt;
  ++i;
  while (i < line.size() && is_blank(line[i])) ++i;
  constexpr std::string_view kKeyword = "!snippet";
  if (line.substr(i, kKeyword.size()) != kKeyword) return std::nullopt;
  i += kKeyword.size();
  std::size_t gap = i;
  while (i < line.size() && is_blank(line[i])) ++i;
  if (i == gap) return std::nullopt;
  std::size_t digits = i;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  if (i == digits) return std::nullopt;
  std::uint32_t id = 0;
  auto [ptr, ec] = std::from_chars(line.data() + digits, line.data() + i, id);
  if (ec != std::errc{} || id == 0) return std::nullopt;
  while (i < line.size() && is_blank(line[i])) ++i;
  if (i != line.size()) return std::nullopt;
  return id;
}

std::size_t estimate_sentences(std::string_view body) { return scan_body(body).sentences; }

SourceDocument split_document(std::string_view input, std::string origin) {
  SourceDocument doc;
  doc.origin = std::move(origin);
  std::set<std::uint32_t> seen;
  Snippet* current = nullptr;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < input.size()) {
    ++line_no;
    auto nl = input.find('\n', pos);
    std::size_t end = nl == std::string_view::npos ? input.size() : nl + 1;
    std::string_view full = input.substr(pos, end - pos);
    std::string_view content = nl == std::string_view::npos ? full : full.substr(0, full.size() - 1);
    if (auto id = parse_delimiter(content)) {
      if (seen.count(*id)) throw SplitError("DuplicateSnippetId", "duplicate snippet id " + std::to_string(*id));
      if (!doc.snippets.empty() && *id < doc.snippets.back().id) {
        throw SplitError("NonMonotoneIds", "snippet id " + std::to_string(*id) + " follows " +
                                               std::to_string(doc.snippets.back().id));
      }
      seen.insert(*id);
      doc.snippets.push_back(Snippet{*id, std::string(full), {}, line_no + 1, line_no, 0});
      current = &doc.snippets.back();
    } else if (current) {
      current->body += full;
      current->last_line = line_no;
    } else {
      doc.preamble += full;
    }
    pos = end;
  }
  if (doc.snippets.empty()) throw SplitError("NoDelimiters", "no '% !snippet <id>' delimiter found");
  for (auto& s : doc.snippets) {
    if (text::trim(s.body).empty()) throw SplitError("EmptySnippet", "snippet " + std::to_string(s.id) + " is empty");
    s.sentence_estimate = estimate_sentences(s.body);
  }
  return doc;
}

std::string_view to_string(WarningKind kind) {
  switch (kind) {
    case WarningKind::TooLong: return "TooLong";
    case WarningKind::NoSentence: return "NoSentence";
    case WarningKind::UnbalancedMath: return "UnbalancedMath";
    case WarningKind::UnbalancedEnvironment: return "UnbalancedEnvironment";
  }
  return "?";
}

std::vector<Warning> validate_snippets(const SourceDocument& doc) {
  std::vector<Warning> out;
  for (const auto& s : doc.snippets) {
    auto scan = scan_body(s.body);
    if (scan.sentences > kMaxSentences) {
      out.push_back({s.id, WarningKind::TooLong,
                     std::to_string(scan.sentences) + " sentences, more than " + std::to_string(kMaxSentences)});
    } else if (scan.sentences == 0) {
      out.push_back({s.id, WarningKind::NoSentence, "no sentence terminator found"});
    }
    if (scan.unbalanced_math) out.push_back({s.id, WarningKind::UnbalancedMath, "unbalanced math delimiters"});
    for (auto& problem : scan.env_problems) {
      out.push_back({s.id, WarningKind::UnbalancedEnvironment, std::move(problem)});
    }
  }
  return out;
}

SnippetContext snippet_context(const SourceDocument& doc, std::uint32_t id, std::size_t budget) {
  std::size_t index = doc.snippets.size();
  for (std::size_t i = 0; i < doc.snippets.size(); ++i) {
    if (doc.snippets[i].id == id) index = i;
  }
  if (index == doc.snippets.size()) throw SplitError("UnknownSnippet", "unknown snippet " + std::to_string(id));

  SnippetContext ctx;
  for (std::size_t i = 0; i < index; ++i) ctx.processed += doc.snippets[i].body;
  ctx.current = doc.snippets[index].body;
  if (index + 1 < doc.snippets.size()) ctx.following = doc.snippets[index + 1].body;

  if (ctx.processed.size() > budget) {
    ctx.truncated = true;
    if (budget < kTruncationMarker.size()) {
      ctx.processed.clear();
      return ctx;
    }
    std::string_view all = ctx.processed;
    std::size_t keep = budget - kTruncationMarker.size();
    std::size_t start = text::utf8_ceil(all, all.size() - keep);
    // Prefer to resume at a line start when one is available.
    auto nl = all.find('\n', start);
    if (nl != std::string_view::npos && nl + 1 < all.size()) start = nl + 1;
    ctx.processed = std::string(kTruncationMarker) + std::string(all.substr(start));
  }
  return ctx;
}

}  // namespace semforge::latex
