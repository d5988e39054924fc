// LaTeX subset -> HTML with source-span tokens.

#include <map>
#include <set>

#include "semforge/semlayer.hpp"
#include "semforge/text.hpp"

namespace semforge::semlayer {

namespace {

bool is_letter(char c) { return text::is_ascii_alpha(static_cast<unsigned char>(c)); }

struct InlineStyle {
  const char* open;
  const char* close;
};

const std::map<std::string_view, InlineStyle> kInlineStyles = {
    {"textit", {"<i>", "</i>"}},     {"textsl", {"<i>", "</i>"}},         {"textbf", {"<b>", "</b>"}},
    {"emph", {"<em>", "</em>"}},     {"texttt", {"<code>", "</code>"}},   {"underline", {"<u>", "</u>"}},
    {"textrm", {"<span>", "</span>"}}, {"textsf", {"<span>", "</span>"}}, {"mbox", {"<span>", "</span>"}},
};

const std::map<std::string_view, int> kSections = {
    {"chapter", 1}, {"section", 2}, {"subsection", 3}, {"subsubsection", 4}, {"paragraph", 5},
};

const std::set<std::string_view> kMathEnvs = {
    "equation", "equation*", "align",      "align*",      "gather",    "gather*",
    "multline", "multline*", "eqnarray",   "eqnarray*",   "displaymath", "flalign", "flalign*",
};

const std::map<std::string_view, std::string_view> kTheoremEnvs = {
    {"theorem", "Theorem"},     {"lemma", "Lemma"},       {"proposition", "Proposition"},
    {"corollary", "Corollary"}, {"definition", "Definition"}, {"remark", "Remark"},
    {"example", "Example"},     {"proof", "Proof"},       {"conjecture", "Conjecture"},
    {"notation", "Notation"},
};

const std::set<std::string_view> kBlockEnvs = {"center", "quote", "quotation", "flushleft", "flushright", "abstract"};

const std::set<std::string_view> kDropped = {"noindent", "maketitle", "centering", "smallskip", "medskip",
                                             "bigskip",  "newpage",   "clearpage", "indent",    "hfill",
                                             "vfill",    "tableofcontents"};

const std::set<std::string_view> kRefs = {"ref", "eqref", "cite", "autoref", "cref", "Cref", "pageref"};

const std::map<std::string_view, std::string_view> kSymbols = {
    {"ldots", "&hellip;"}, {"dots", "&hellip;"}, {"LaTeX", "LaTeX"}, {"TeX", "TeX"},
    {"quad", "&emsp;"},    {"qquad", "&emsp;&emsp;"}, {"newline", "<br>\n"},
};

const std::set<std::string_view> kHeaderCommands = {"title", "author", "date", "thanks"};

class Converter {
 public:
  explicit Converter(std::string_view s) : s_(s) {}

  HtmlFragment run() {
    if (flow(Stop{}) != Ended::Eof) fail(i_, "unexpected end of group");
    close_para();
    HtmlFragment f;
    for (const auto& t : out_) f.html += t.html;
    f.tokens = std::move(out_);
    f.warnings = std::move(warnings_);
    return f;
  }

 private:
  enum class Ended { Eof, Brace, Bracket, Env, Item };
  struct Stop {
    bool brace = false;
    bool bracket = false;
    bool item = false;
    std::string_view env;
  };

  [[noreturn]] void fail(std::size_t pos, const std::string& message) const {
    throw Error("UnbalancedInput", "offset " + std::to_string(pos) + ": " + message);
  }

  void markup(std::string html) {
    Token t;
    t.kind = Token::Kind::Markup;
    t.html = std::move(html);
    out_.push_back(std::move(t));
  }

  void inline_markup(std::string html) {
    ensure_para();
    markup(std::move(html));
  }

  void ensure_para() {
    if (allow_para_ && !para_open_) {
      markup("<div class=\"para\">");
      para_open_ = true;
    }
  }

  void close_para() {
    if (para_open_) {
      markup("</div>\n");
      para_open_ = false;
    }
  }

  void warn(const std::string& message) { warnings_.push_back(message); }

  bool blank_line_at(std::size_t pos) const {
    if (pos >= s_.size() || s_[pos] != '\n') return false;
    for (std::size_t j = pos + 1; j < s_.size(); ++j) {
      if (s_[j] == '\n') return true;
      if (s_[j] != ' ' && s_[j] != '\t' && s_[j] != '\r') return false;
    }
    return false;
  }

  static bool special(char c) {
    return c == '\\' || c == '{' || c == '}' || c == '$' || c == '%' || c == '~' || c == ']';
  }

  void plain_text() {
    std::size_t start = i_;
    while (i_ < s_.size() && !special(s_[i_])) {
      if (s_[i_] == '\n' && blank_line_at(i_)) break;
      ++i_;
    }
    if (i_ == start) ++i_;  // a lone ']' outside an optional argument
    auto piece = s_.substr(start, i_ - start);
    if (!text::trim(piece).empty()) ensure_para();
    Token t;
    t.kind = Token::Kind::Text;
    t.begin = start;
    t.end = i_;
    t.html = text::html_escape(piece);
    out_.push_back(std::move(t));
  }

  void paragraph_break() {
    while (i_ < s_.size() && (s_[i_] == '\n' || s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r')) ++i_;
    if (allow_para_) {
      close_para();
      markup("\n");
    } else {
      markup(" ");
    }
  }

  void skip_comment() {
    auto nl = s_.find('\n', i_);
    i_ = nl == std::string_view::npos ? s_.size() : nl + 1;
  }

  // Position just past the closing `delim`, skipping escaped characters.
  std::size_t find_math_end(std::size_t from, std::string_view delim) const {
    for (std::size_t j = from; j < s_.size(); ++j) {
      if (s_.substr(j, delim.size()) == delim) return j;
      if (s_[j] == '\\') ++j;
    }
    return std::string_view::npos;
  }

  void math_token(std::size_t begin, std::size_t content_begin, std::size_t content_end, std::size_t end,
                  bool display, bool environment) {
    ensure_para();
    Token t;
    t.kind = Token::Kind::Math;
    t.begin = begin;
    t.end = end;
    t.content_begin = content_begin;
    t.content_end = content_end;
    auto content = text::html_escape(s_.substr(content_begin, content_end - content_begin));
    if (environment) {
      t.html = "<div class=\"math display\">" + text::html_escape(s_.substr(begin, end - begin)) + "</div>";
    } else if (display) {
      t.html = "<div class=\"math display\">\\[" + content + "\\]</div>";
    } else {
      t.html = "<span class=\"math\">\\(" + content + "\\)</span>";
    }
    out_.push_back(std::move(t));
    i_ = end;
  }

  void math_dollar() {
    std::size_t begin = i_;
    if (i_ + 1 < s_.size() && s_[i_ + 1] == '$') {
      auto close = find_math_end(i_ + 2, "$$");
      if (close == std::string_view::npos) fail(begin, "unclosed $$");
      math_token(begin, begin + 2, close, close + 2, true, false);
      return;
    }
    auto close = find_math_end(i_ + 1, "$");
    if (close == std::string_view::npos) fail(begin, "unclosed $");
    math_token(begin, begin + 1, close, close + 1, false, false);
  }

  void skip_spaces() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }

  // Balanced {...} or [...] starting at i_; returns the inner text.
  std::string_view raw_group(char open, char close) {
    std::size_t start = i_;
    if (i_ >= s_.size() || s_[i_] != open) fail(i_, std::string("expected '") + open + "'");
    int depth = 0;
    for (; i_ < s_.size(); ++i_) {
      char c = s_[i_];
      if (c == '\\') {
        ++i_;
        continue;
      }
      if (c == open) ++depth;
      if (c == close && --depth == 0) {
        ++i_;
        return s_.substr(start + 1, i_ - start - 2);
      }
    }
    fail(start, std::string("unclosed '") + open + "'");
  }

  void skip_optional() {
    if (i_ < s_.size() && s_[i_] == '[') raw_group('[', ']');
  }

  void argument(const char* open, const char* close) {
    if (i_ >= s_.size() || s_[i_] != '{') {
      warn("command argument without braces at offset " + std::to_string(i_));
      return;
    }
    std::size_t start = i_++;
    bool saved = allow_para_;
    allow_para_ = false;
    markup(open);
    if (flow(Stop{.brace = true, .env = {}}) != Ended::Brace) fail(start, "unclosed '{'");
    ++i_;
    markup(close);
    allow_para_ = saved;
  }

  void list(std::string_view env) {
    close_para();
    const char* tag = env == "enumerate" ? "ol" : "ul";
    markup(std::string("<") + tag + ">\n");
    bool saved = allow_para_;
    allow_para_ = false;
    for (;;) {
      while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r' || s_[i_] == '%')) {
        if (s_[i_] == '%') {
          skip_comment();
        } else {
          ++i_;
        }
      }
      if (s_.substr(i_, 5) == "\\item" && (i_ + 5 >= s_.size() || !is_letter(s_[i_ + 5]))) {
        i_ += 5;
        skip_optional();
      }
      std::size_t start = i_;
      markup("<li>");
      auto ended = flow(Stop{.item = true, .env = env});
      markup("</li>\n");
      if (ended == Ended::Env) break;
      if (ended != Ended::Item) fail(start, "unclosed \\begin{" + std::string(env) + "}");
    }
    allow_para_ = saved;
    markup(std::string("</") + tag + ">\n");
  }

  void block_env(std::string_view env, std::optional<std::string_view> name, std::size_t start) {
    close_para();
    markup("<div class=\"env env-" + text::html_escape(env) + "\">");
    if (name) markup("<span class=\"env-name\">" + std::string(*name) + "</span>");
    bool saved_allow = allow_para_;
    if (i_ < s_.size() && s_[i_] == '[') {
      ++i_;
      allow_para_ = false;
      markup(" <span class=\"env-title\">(");
      if (flow(Stop{.bracket = true, .env = {}}) != Ended::Bracket) fail(start, "unclosed '['");
      ++i_;
      markup(")</span>");
    }
    allow_para_ = true;
    para_open_ = false;
    if (flow(Stop{.env = env}) != Ended::Env) fail(start, "unclosed \\begin{" + std::string(env) + "}");
    close_para();
    allow_para_ = saved_allow;
    markup("</div>\n");
  }

  void begin_env(std::size_t start) {
    auto env = raw_group('{', '}');
    if (env == "document") return;
    if (env == "itemize" || env == "enumerate" || env == "description") return list(env);
    if (kMathEnvs.count(env)) {
      std::string end_tag = "\\end{" + std::string(env) + "}";
      auto close = s_.find(end_tag, i_);
      if (close == std::string_view::npos) fail(start, "unclosed \\begin{" + std::string(env) + "}");
      return math_token(start, i_, close, close + end_tag.size(), true, true);
    }
    if (auto it = kTheoremEnvs.find(env); it != kTheoremEnvs.end()) return block_env(env, it->second, start);
    if (kBlockEnvs.count(env)) return block_env(env, std::nullopt, start);
    warn("unsupported environment '" + std::string(env) + "' copied verbatim");
    inline_markup(text::html_escape(s_.substr(start, i_ - start)));
    std::size_t inner = i_;
    if (flow(Stop{.env = env}) != Ended::Env) fail(inner, "unclosed \\begin{" + std::string(env) + "}");
    inline_markup(text::html_escape("\\end{" + std::string(env) + "}"));
  }

  void verbatim_command(std::size_t start, std::string_view name) {
    warn("unsupported command '\\" + std::string(name) + "' copied verbatim");
    while (i_ < s_.size() && (s_[i_] == '{' || s_[i_] == '[')) {
      if (s_[i_] == '{') {
        raw_group('{', '}');
      } else {
        raw_group('[', ']');
      }
    }
    inline_markup(text::html_escape(s_.substr(start, i_ - start)));
  }

  std::optional<Ended> command(const Stop& stop) {
    const std::size_t start = i_++;
    if (i_ >= s_.size()) fail(start, "dangling backslash");
    if (!is_letter(s_[i_])) {
      char c = s_[i_++];
      switch (c) {
        case '(': {
          auto close = find_math_end(i_, "\\)");
          if (close == std::string_view::npos) fail(start, "unclosed \\(");
          math_token(start, i_, close, close + 2, false, false);
          return std::nullopt;
        }
        case '[': {
          auto close = find_math_end(i_, "\\]");
          if (close == std::string_view::npos) fail(start, "unclosed \\[");
          math_token(start, i_, close, close + 2, true, false);
          return std::nullopt;
        }
        case '\\':
          if (i_ < s_.size() && s_[i_] == '*') ++i_;
          skip_optional();
          inline_markup("<br>\n");
          return std::nullopt;
        case '%': case '&': case '#': case '_': case '{': case '}': case '$':
          inline_markup(text::html_escape(std::string(1, c)));
          return std::nullopt;
        case ',': case ';': case ':': case '!': case ' ': case '\n':
          inline_markup(" ");
          return std::nullopt;
        case '-': case '/':
          return std::nullopt;
        default:
          verbatim_command(start, std::string_view(&s_[i_ - 1], 1));
          return std::nullopt;
      }
    }
    std::size_t name_start = i_;
    while (i_ < s_.size() && is_letter(s_[i_])) ++i_;
    auto name = s_.substr(name_start, i_ - name_start);

    if (name == "end") {
      auto env = raw_group('{', '}');
      if (!stop.env.empty() && env == stop.env) return Ended::Env;
      if (env == "document") return std::nullopt;
      fail(start, "\\end{" + std::string(env) + "} without matching \\begin");
    }
    if (name == "item") {
      if (stop.item) return Ended::Item;
      verbatim_command(start, name);
      return std::nullopt;
    }
    if (name == "begin") {
      begin_env(start);
      return std::nullopt;
    }
    if (auto it = kSections.find(name); it != kSections.end()) {
      if (i_ < s_.size() && s_[i_] == '*') ++i_;
      skip_optional();
      close_para();
      auto level = std::to_string(it->second);
      argument(("<h" + level + ">").c_str(), ("</h" + level + ">\n").c_str());
      return std::nullopt;
    }
    if (auto it = kInlineStyles.find(name); it != kInlineStyles.end()) {
      ensure_para();
      argument(it->second.open, it->second.close);
      return std::nullopt;
    }
    if (name == "label" || kHeaderCommands.count(name)) {
      skip_spaces();
      raw_group('{', '}');
      return std::nullopt;
    }
    if (kRefs.count(name)) {
      skip_optional();
      auto key = raw_group('{', '}');
      inline_markup("<span class=\"ref\">[" + text::html_escape(key) + "]</span>");
      return std::nullopt;
    }
    if (name == "par") {
      if (allow_para_) close_para();
      return std::nullopt;
    }
    if (kDropped.count(name)) return std::nullopt;
    if (auto it = kSymbols.find(name); it != kSymbols.end()) {
      inline_markup(std::string(it->second));
      return std::nullopt;
    }
    verbatim_command(start, name);
    return std::nullopt;
  }

  Ended flow(const Stop& stop) {
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == '}') {
        if (stop.brace) return Ended::Brace;
        fail(i_, "unmatched '}'");
      }
      if (c == ']' && stop.bracket) return Ended::Bracket;
      if (c == '{') {
        std::size_t start = i_++;
        if (flow(Stop{.brace = true, .env = {}}) != Ended::Brace) fail(start, "unclosed '{'");
        ++i_;
        continue;
      }
      if (c == '%') {
        skip_comment();
        continue;
      }
      if (c == '$') {
        math_dollar();
        continue;
      }
      if (c == '~') {
        ++i_;
        inline_markup("&nbsp;");
        continue;
      }
      if (c == '\\') {
        std::size_t start = i_;
        if (auto ended = command(stop)) {
          if (*ended == Ended::Item) i_ = start;
          return *ended;
        }
        continue;
      }
      if (c == '\n' && blank_line_at(i_)) {
        paragraph_break();
        continue;
      }
      plain_text();
    }
    return Ended::Eof;
  }

  std::string_view s_;
  std::size_t i_ = 0;
  bool allow_para_ = true;
  bool para_open_ = false;
  std::vector<Token> out_;
  std::vector<std::string> warnings_;
};

}  // namespace

HtmlFragment latex_to_html(std::string_view body) { return Converter(body).run(); }

}  // namespace semforge::semlayer
