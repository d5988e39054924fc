#pragma once

// HTML rendering of snippets plus the hover-tooltip layer.
//
// Conversion keeps a token stream whose text and math tokens point back
// into the snippet body, so occurrences found in the LaTeX source can be
// anchored in the output without re-parsing HTML.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semforge/error.hpp"
#include "semforge/kgraph.hpp"
#include "semforge/latex_ingest.hpp"

namespace semforge::prompting {
class LlmClient;
}

namespace semforge::semlayer {

struct Token {
  enum class Kind { Markup, Text, Math };
  Kind kind = Kind::Markup;
  std::string html;        // Markup: emitted as is; Math: the full element
  std::size_t begin = 0;   // Text/Math: source span in the snippet body
  std::size_t end = 0;
  std::size_t content_begin = 0;  // Math: the LaTeX between the delimiters
  std::size_t content_end = 0;
};

struct HtmlFragment {
  std::string html;
  std::vector<std::string> warnings;
  std::vector<Token> tokens;
};

// Supported: paragraphs, \textit \textbf \emph \texttt \underline,
// \chapter..\paragraph, itemize/enumerate, inline and display math,
// math environments, theorem-like environments, \label (dropped),
// \ref \eqref \cite, escapes, ~ and \\. Anything else is copied verbatim
// with a warning. Throws Error("UnbalancedInput").
HtmlFragment latex_to_html(std::string_view body);

enum class MatchForm { Label, Notation };

struct Occurrence {
  kg::Uri entity;
  std::uint32_t snippet = 0;
  std::size_t begin = 0;  // byte span in the snippet body
  std::size_t end = 0;
  MatchForm form = MatchForm::Label;
  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

struct OccurrenceIndex {
  std::vector<Occurrence> occurrences;  // by snippet, then span start
  std::vector<std::string> warnings;    // PreDefinitionUse, unconvertible snippets
};

// Items with a defining snippet (provenance), except scope items, are
// searched. Labels match in text on word boundaries, whitespace runs
// matching single spaces and the first letter case-insensitively;
// notations match in math after normalize_math(). Overlaps resolve
// longest first, then earliest start. Matches before the defining snippet
// become warnings.
OccurrenceIndex index_occurrences(const latex::SourceDocument& doc, const kg::KnowledgeGraph& graph);

struct TooltipSpec {
  kg::Uri entity;
  std::string title;
  std::string kind;
  std::string body;
  std::optional<std::string> notation;
  std::uint32_t source = 0;
  std::optional<std::string> refined_body;
};

// Graph facts about `entity` as short lines ("is a subspace"), used for the
// body when there is no description and for the refinement prompt.
std::vector<std::string> entity_facts(const kg::Uri& entity, const kg::KnowledgeGraph& graph);

// With a client, asks for refined_body using the tooltip prompt; client
// failures are appended to `warnings` and the base content is returned.
// Throws GraphError("UnknownEntity").
TooltipSpec generate_tooltip_content(const kg::Uri& entity, const kg::KnowledgeGraph& graph,
                                     const latex::SourceDocument* doc = nullptr,
                                     const prompting::LlmClient* client = nullptr,
                                     std::vector<std::string>* warnings = nullptr);

std::string tooltip_html(const TooltipSpec& spec);

struct RenderOptions {
  std::string stylesheet;  // empty: the built-in one
  bool mathjax = true;
};

struct RenderedDocument {
  std::string html;
  std::vector<std::string> warnings;
};

// Throws Error("DanglingOccurrence") when an occurrence does not point at a
// text or math token of an existing snippet, or names an unknown entity.
RenderedDocument render(const latex::SourceDocument& doc, const kg::KnowledgeGraph& graph,
                        const std::vector<Occurrence>& occurrences, const std::map<kg::Uri, TooltipSpec>& tooltips,
                        const RenderOptions& options = {});

}  // namespace semforge::semlayer
