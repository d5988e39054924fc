#include "semforge/semlayer.hpp"

#include <algorithm>
#include <tuple>

#include "semforge/defaults.hpp"
#include "semforge/prompting.hpp"
#include "semforge/text.hpp"

namespace semforge::semlayer {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_letter(char c) { return text::is_ascii_alpha(static_cast<unsigned char>(c)); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word(char c) { return text::is_word_byte(static_cast<unsigned char>(c)); }

// End of a label match starting at `pos`, or npos. The search stays inside
// [pos, limit).
std::size_t match_label(std::string_view body, std::size_t pos, std::size_t limit, std::string_view label) {
  std::size_t j = pos;
  for (std::size_t k = 0; k < label.size();) {
    if (label[k] == ' ') {
      if (j >= limit || !is_space(body[j])) return std::string_view::npos;
      while (j < limit && is_space(body[j])) ++j;
      while (k < label.size() && label[k] == ' ') ++k;
      continue;
    }
    if (j >= limit) return std::string_view::npos;
    bool same = k == 0 ? text::ascii_lower(body[j]) == text::ascii_lower(label[k]) : body[j] == label[k];
    if (!same) return std::string_view::npos;
    ++j;
    ++k;
  }
  return j;
}

struct Candidate {
  kg::Uri entity;
  std::size_t begin;
  std::size_t end;
  MatchForm form;
  std::uint32_t defined_in;
};

struct Entry {
  kg::Uri entity;
  std::string form;  // label with whitespace collapsed, or normalized notation
  std::uint32_t defined_in;
  std::string label;
};

void label_candidates(std::string_view body, const Token& t, const std::vector<Entry>& labels,
                      std::vector<Candidate>& out) {
  for (std::size_t p = t.begin; p < t.end; ++p) {
    for (const auto& e : labels) {
      if (is_word(e.form.front()) && p > 0 && is_word(body[p - 1])) continue;
      auto end = match_label(body, p, t.end, e.form);
      if (end == std::string_view::npos) continue;
      if (is_word(e.form.back()) && end < body.size() && is_word(body[end])) continue;
      out.push_back({e.entity, p, end, MatchForm::Label, e.defined_in});
    }
  }
}

void notation_candidates(std::string_view body, const Token& t, const std::vector<Entry>& notations,
                         std::vector<Candidate>& out) {
  auto content = body.substr(t.content_begin, t.content_end - t.content_begin);
  auto norm = text::normalize_math_mapped(content);
  const auto& s = norm.text;
  for (const auto& e : notations) {
    const auto& n = e.form;
    for (auto p = s.find(n); p != std::string::npos; p = s.find(n, p + 1)) {
      std::size_t q = p + n.size();
      if (p > 0 && (s[p - 1] == '\\' || (is_letter(n.front()) && is_letter(s[p - 1])) ||
                    (is_digit(n.front()) && is_digit(s[p - 1])))) {
        continue;
      }
      if (q < s.size() && ((is_letter(n.back()) && is_letter(s[q])) || (is_digit(n.back()) && is_digit(s[q])))) {
        continue;
      }
      std::size_t begin = t.content_begin + norm.source_offset[p];
      std::size_t end = t.content_begin + norm.source_offset[q - 1] + 1;
      out.push_back({e.entity, begin, end, MatchForm::Notation, e.defined_in});
    }
  }
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : text::trim(s)) {
    if (is_space(c)) {
      space = true;
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string object_text(const kg::Object& o, const kg::KnowledgeGraph& graph) {
  if (const auto* lit = std::get_if<kg::Literal>(&o)) {
    if (const auto* s = std::get_if<std::string>(&lit->value)) return *s;
    if (const auto* i = std::get_if<std::int64_t>(&lit->value)) return std::to_string(*i);
    return std::get<kg::Decimal>(lit->value).text;
  }
  const auto& uri = std::get<kg::Uri>(o);
  if (const auto* item = graph.find_item(uri)) return item->label;
  if (const auto* rel = graph.find_relation(uri)) return rel->label;
  return "a statement";
}

std::string predicate_words(std::string label) {
  std::replace(label.begin(), label.end(), '_', ' ');
  return label;
}

// \title{...} from the preamble, with commands and braces removed.
std::optional<std::string> preamble_field(std::string_view preamble, std::string_view command) {
  std::string key = "\\" + std::string(command) + "{";
  auto pos = preamble.find(key);
  if (pos == std::string_view::npos) return std::nullopt;
  std::size_t i = pos + key.size();
  int depth = 1;
  std::string raw;
  for (; i < preamble.size(); ++i) {
    char c = preamble[i];
    if (c == '\\' && i + 1 < preamble.size()) {
      if (is_letter(preamble[i + 1])) {
        ++i;
        while (i + 1 < preamble.size() && is_letter(preamble[i + 1])) ++i;
        if (i + 1 < preamble.size() && preamble[i + 1] == ' ') ++i;
      } else {
        raw += preamble[++i] == '\\' ? ' ' : preamble[i];
      }
      continue;
    }
    if (c == '{') {
      ++depth;
      continue;
    }
    if (c == '}' && --depth == 0) break;
    if (c == '}') continue;
    raw += c;
  }
  auto value = collapse_spaces(raw);
  if (value.empty()) return std::nullopt;
  return value;
}

}  // namespace

OccurrenceIndex index_occurrences(const latex::SourceDocument& doc, const kg::KnowledgeGraph& graph) {
  std::vector<Entry> labels, notations;
  for (const auto& [uri, entity] : graph.entities()) {
    const auto* item = std::get_if<kg::Item>(&entity);
    if (!item || !item->provenance || item->is_scope_item()) continue;
    auto label = collapse_spaces(item->label);
    if (!label.empty()) labels.push_back({uri, label, *item->provenance, item->label});
    if (item->notation) {
      auto n = text::normalize_math(*item->notation);
      if (!n.empty()) notations.push_back({uri, n, *item->provenance, item->label});
    }
  }

  OccurrenceIndex index;
  for (const auto& snippet : doc.snippets) {
    HtmlFragment frag;
    try {
      frag = latex_to_html(snippet.body);
    } catch (const Error& e) {
      index.warnings.push_back("snippet " + std::to_string(snippet.id) + ": not indexed: " + e.what());
      continue;
    }
    std::vector<Candidate> cands;
    for (const auto& t : frag.tokens) {
      if (t.kind == Token::Kind::Text) label_candidates(snippet.body, t, labels, cands);
      if (t.kind == Token::Kind::Math) notation_candidates(snippet.body, t, notations, cands);
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return std::make_tuple(b.end - b.begin, a.begin, a.entity) < std::make_tuple(a.end - a.begin, b.begin, b.entity);
    });
    std::vector<Candidate> kept;
    for (const auto& c : cands) {
      bool overlaps = std::any_of(kept.begin(), kept.end(),
                                  [&](const Candidate& k) { return c.begin < k.end && k.begin < c.end; });
      if (!overlaps) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) { return a.begin < b.begin; });
    for (const auto& c : kept) {
      if (snippet.id >= c.defined_in) {
        index.occurrences.push_back({c.entity, snippet.id, c.begin, c.end, c.form});
        continue;
      }
      index.warnings.push_back("PreDefinitionUse: snippet " + std::to_string(snippet.id) + " mentions '" +
                               snippet.body.substr(c.begin, c.end - c.begin) + "' (" + c.entity.str() +
                               ") before its definition in snippet " + std::to_string(c.defined_in));
    }
  }
  return index;
}

std::vector<std::string> entity_facts(const kg::Uri& entity, const kg::KnowledgeGraph& graph) {
  static const std::set<std::string, std::less<>> kSkipped = {"has_source_snippet", "has_notation",
                                                              "has_description", "has_scope"};
  std::vector<std::string> facts;
  for (const auto& st : graph.query({entity, std::nullopt, std::nullopt})) {
    const auto& rel = graph.find_relation(st.predicate)->label;
    if (kSkipped.count(rel)) continue;
    facts.push_back(predicate_words(rel) + " " + object_text(st.object, graph));
  }
  return facts;
}

TooltipSpec generate_tooltip_content(const kg::Uri& entity, const kg::KnowledgeGraph& graph,
                                     const latex::SourceDocument* doc, const prompting::LlmClient* client,
                                     std::vector<std::string>* warnings) {
  const auto* item = graph.find_item(entity);
  if (!item) throw kg::GraphError("UnknownEntity", "no item " + entity.str());
  TooltipSpec spec;
  spec.entity = entity;
  spec.title = item->label;
  spec.notation = item->notation;
  spec.source = item->provenance.value_or(0);

  std::string kinds;
  for (const auto& st : graph.query({entity, *graph.builtin("is_a"), std::nullopt})) {
    if (!kinds.empty()) kinds += ", ";
    kinds += object_text(st.object, graph);
  }
  spec.kind = kinds.empty() ? "term" : kinds;

  auto facts = entity_facts(entity, graph);
  if (item->description) {
    spec.body = *item->description;
  } else {
    for (const auto& f : facts) spec.body += (spec.body.empty() ? "" : "; ") + f;
  }

  if (client) {
    std::string fact_lines;
    if (item->description) fact_lines += "- description: " + *item->description + "\n";
    if (item->notation) fact_lines += "- notation: $" + *item->notation + "$\n";
    for (const auto& f : facts) fact_lines += "- " + f + "\n";
    const latex::Snippet* snippet = doc ? doc->find(spec.source) : nullptr;
    std::string prompt(defaults::tooltip_prompt());
    auto replace = [&](std::string_view key, std::string_view value) {
      for (auto pos = prompt.find(key); pos != std::string::npos; pos = prompt.find(key, pos + value.size())) {
        prompt.replace(pos, key.size(), value);
      }
    };
    // {{snippet}} last: its value is document text and must not be expanded.
    replace("{{label}}", item->label);
    replace("{{facts}}", fact_lines);
    replace("{{snippet_id}}", std::to_string(spec.source));
    replace("{{snippet}}", snippet ? std::string_view(snippet->body) : std::string_view("(not available)\n"));
    auto bundle = prompting::make_bundle(spec.source, client->options().model, std::move(prompt));
    try {
      auto refined = std::string(text::trim(client->complete(bundle).text));
      if (!refined.empty()) spec.refined_body = std::move(refined);
    } catch (const Error& e) {
      if (warnings) warnings->push_back("tooltip refinement for '" + item->label + "' failed: " + e.what());
    }
  }
  return spec;
}

std::string tooltip_html(const TooltipSpec& spec) {
  std::string out = "<div class=\"tooltip\">";
  out += "<span class=\"tt-title\">" + text::html_escape(spec.title) + "</span>";
  out += "<span class=\"tt-kind\">(" + text::html_escape(spec.kind) + ")</span>";
  if (spec.notation) out += "<span class=\"tt-notation\">\\(" + text::html_escape(*spec.notation) + "\\)</span>";
  if (!spec.body.empty()) out += "<span class=\"tt-body\">" + text::html_escape(spec.body) + "</span>";
  if (spec.refined_body) out += "<span class=\"tt-refined\">" + text::html_escape(*spec.refined_body) + "</span>";
  auto id = std::to_string(spec.source);
  out += "<span class=\"tt-source\">Defined in <a href=\"#snippet-" + id + "\">snippet " + id + "</a></span>";
  out += "</div>";
  return out;
}

RenderedDocument render(const latex::SourceDocument& doc, const kg::KnowledgeGraph& graph,
                        const std::vector<Occurrence>& occurrences, const std::map<kg::Uri, TooltipSpec>& tooltips,
                        const RenderOptions& options) {
  RenderedDocument result;
  auto dangling = [](const Occurrence& o, const std::string& why) {
    throw Error("DanglingOccurrence", "occurrence of " + o.entity.str() + " in snippet " + std::to_string(o.snippet) +
                                          " [" + std::to_string(o.begin) + ", " + std::to_string(o.end) + "): " + why);
  };

  std::map<std::uint32_t, std::vector<const Occurrence*>> by_snippet;
  for (const auto& o : occurrences) {
    if (!doc.find(o.snippet)) dangling(o, "no such snippet");
    const auto* item = graph.find_item(o.entity);
    if (!item) dangling(o, "no such item");
    if (o.begin >= o.end || o.end > doc.find(o.snippet)->body.size()) dangling(o, "span outside the snippet");
    by_snippet[o.snippet].push_back(&o);
  }
  std::map<kg::Uri, std::string> tooltip_cache;
  auto tooltip_for = [&](const kg::Uri& uri) -> const std::string& {
    auto it = tooltip_cache.find(uri);
    if (it != tooltip_cache.end()) return it->second;
    auto spec = tooltips.find(uri);
    auto html = tooltip_html(spec != tooltips.end() ? spec->second : generate_tooltip_content(uri, graph));
    return tooltip_cache.emplace(uri, std::move(html)).first->second;
  };

  auto title = preamble_field(doc.preamble, "title");
  auto author = preamble_field(doc.preamble, "author");
  std::string page_title = title ? *title : (doc.origin.empty() ? "Document" : doc.origin);

  std::string& out = result.html;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  out += "<title>" + text::html_escape(page_title) + "</title>\n<style>\n";
  out += options.stylesheet.empty() ? std::string(defaults::stylesheet()) : options.stylesheet;
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += "</style>\n";
  if (options.mathjax) {
    out += "<script defer src=\"https://cdn.jsdelivr.net/npm/mathjax@3/es5/tex-chtml.js\"></script>\n";
  }
  out += "</head>\n<body>\n<header class=\"doc-header\">\n";
  out += "<h1 class=\"doc-title\">" + text::html_escape(page_title) + "</h1>\n";
  if (author) out += "<div class=\"doc-author\">" + text::html_escape(*author) + "</div>\n";
  out += "</header>\n";
  if (!doc.preamble.empty()) out += "<pre class=\"latex-preamble\">" + text::html_escape(doc.preamble) + "</pre>\n";

  for (const auto& snippet : doc.snippets) {
    auto id = std::to_string(snippet.id);
    out += "<section class=\"snippet\" id=\"snippet-" + id + "\">\n";
    auto& occs = by_snippet[snippet.id];
    std::sort(occs.begin(), occs.end(), [](const Occurrence* a, const Occurrence* b) {
      return std::tie(a->begin, a->end) < std::tie(b->begin, b->end);
    });
    HtmlFragment frag;
    try {
      frag = latex_to_html(snippet.body);
    } catch (const Error& e) {
      result.warnings.push_back("snippet " + id + ": " + e.what() + "; emitted as source");
      if (!occs.empty()) dangling(*occs.front(), "snippet could not be converted");
      out += "<pre class=\"latex-source\">" + text::html_escape(snippet.body) + "</pre>\n</section>\n";
      continue;
    }
    for (const auto& w : frag.warnings) result.warnings.push_back("snippet " + id + ": " + w);

    std::size_t next = 0;  // first occurrence not yet placed
    const std::string_view body = snippet.body;
    for (const auto& t : frag.tokens) {
      if (t.kind == Token::Kind::Markup) {
        out += t.html;
        continue;
      }
      std::vector<const Occurrence*> inside;
      while (next < occs.size() && occs[next]->begin < t.end) {
        const auto* o = occs[next];
        if (o->begin < t.begin || o->end > t.end) dangling(*o, "span does not lie within one text or math region");
        if (!inside.empty() && o->begin < inside.back()->end) dangling(*o, "overlaps another occurrence");
        inside.push_back(o);
        ++next;
      }
      if (t.kind == Token::Kind::Math) {
        for (std::size_t k = 0; k < inside.size(); ++k) out += "<span class=\"sem-anchor\">";
        out += t.html;
        for (auto it = inside.rbegin(); it != inside.rend(); ++it) out += tooltip_for((*it)->entity) + "</span>";
        continue;
      }
      std::size_t cursor = t.begin;
      for (const auto* o : inside) {
        out += text::html_escape(body.substr(cursor, o->begin - cursor));
        out += "<span class=\"sem-anchor\">" + text::html_escape(body.substr(o->begin, o->end - o->begin));
        out += tooltip_for(o->entity) + "</span>";
        cursor = o->end;
      }
      out += text::html_escape(body.substr(cursor, t.end - cursor));
    }
    if (next < occs.size()) dangling(*occs[next], "span does not lie within a text or math region");
    out += "</section>\n";
  }
  out += "</body>\n</html>\n";
  return result;
}

}  // namespace semforge::semlayer
