#pragma once

// Small string helpers shared by all modules.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semforge::text {

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

// Splits on every occurrence of `sep`; always yields at least one element.
std::vector<std::string_view> split(std::string_view s, char sep);

bool starts_with(std::string_view s, std::string_view prefix);

// ASCII letters/digits and every non-ASCII byte count as word characters.
bool is_word_byte(unsigned char c);
bool is_ascii_alpha(unsigned char c);
char ascii_lower(char c);

// Backslash escaping for tab-separated records: \\ \t \n \r.
std::string escape_field(std::string_view s);
std::optional<std::string> unescape_field(std::string_view s);

// C-style quoting used by string literals: wraps in double quotes and
// escapes \\ \" \t \n \r.
std::string quote(std::string_view s);
// Inverse of quote(); `s` must include the surrounding quotes.
std::optional<std::string> unquote(std::string_view s);

std::string html_escape(std::string_view s);

// Maps a free-form label to the identifier form used by FNL references:
// ASCII lowercase, every run of non-alphanumerics becomes one underscore,
// leading/trailing underscores dropped. "Inner product space" ->
// "inner_product_space".
std::string identifier_of(std::string_view label);

bool braces_balanced(std::string_view s);

// Canonical form for comparing LaTeX math: whitespace is dropped except a
// single space separating a control word from a following letter.
std::string normalize_math(std::string_view math);

// normalize_math() plus, for every output byte, the offset of the input
// byte it came from.
struct NormalizedMath {
  std::string text;
  std::vector<std::size_t> source_offset;
};
NormalizedMath normalize_math_mapped(std::string_view math);

// Largest n <= limit such that s.substr(0, n) does not end inside a UTF-8
// sequence.
std::size_t utf8_floor(std::string_view s, std::size_t limit);
// Smallest n >= pos that starts a UTF-8 sequence (or s.size()).
std::size_t utf8_ceil(std::string_view s, std::size_t pos);

std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename so readers never see a torn file.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace semforge::text
