#pragma once

// Splits delimiter-annotated LaTeX into snippets. A delimiter is a comment
// line of the form `% !snippet <id>`; everything before the first one is
// the preamble.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semforge/error.hpp"

namespace semforge::latex {

struct Snippet {
  std::uint32_t id = 0;
  std::string delimiter;  // the delimiter line, including its line break
  std::string body;
  std::size_t first_line = 0;  // 1-based, inclusive
  std::size_t last_line = 0;
  std::size_t sentence_estimate = 0;
};

struct SourceDocument {
  std::string origin;
  std::string preamble;
  std::vector<Snippet> snippets;

  // preamble + every (delimiter + body), byte for byte.
  std::string reassemble() const;
  const Snippet* find(std::uint32_t id) const;
};

class SplitError : public Error {
 public:
  using Error::Error;
};

// Throws SplitError: NoDelimiters, DuplicateSnippetId, NonMonotoneIds,
// EmptySnippet.
SourceDocument split_document(std::string_view text, std::string origin = {});

// Returns the id if `line` (without line break) is a delimiter comment.
std::optional<std::uint32_t> parse_delimiter(std::string_view line);

// Counts '.', '!' or '?' followed by whitespace or end of input, outside
// math and comments.
std::size_t estimate_sentences(std::string_view body);

enum class WarningKind { TooLong, NoSentence, UnbalancedMath, UnbalancedEnvironment };
std::string_view to_string(WarningKind kind);

struct Warning {
  std::uint32_t snippet = 0;
  WarningKind kind{};
  std::string message;
  friend bool operator==(const Warning&, const Warning&) = default;
};

inline constexpr std::size_t kMaxSentences = 5;

std::vector<Warning> validate_snippets(const SourceDocument& doc);

inline constexpr std::string_view kTruncationMarker = "[... earlier text truncated ...]\n";

struct SnippetContext {
  std::string processed;  // bodies of all earlier snippets, front-truncated to the budget
  std::string current;
  std::optional<std::string> following;
  bool truncated = false;
};

// `budget` bounds processed.size(). When truncation is needed the result
// starts with kTruncationMarker; if even the marker does not fit, processed
// is empty. Throws SplitError("UnknownSnippet").
SnippetContext snippet_context(const SourceDocument& doc, std::uint32_t id, std::size_t budget);

}  // namespace semforge::latex
