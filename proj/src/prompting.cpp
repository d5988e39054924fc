#include "semforge/prompting.hpp"

#include <algorithm>

#include "semforge/defaults.hpp"
#include "semforge/text.hpp"

namespace semforge::prompting {

namespace {

constexpr std::string_view kSlots[] = {kProcessedSlot, kExtractedSlot, kCurrentSlot, kFollowingSlot};

std::size_t count_of(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

struct SlotValues {
  std::string_view vocabulary;
  std::string_view processed;
  std::string_view extracted;
  std::string_view current;
  std::string_view following;
  std::string snippet_id;
};

// Single left-to-right pass, so placeholder-like text inside a value is
// never expanded again.
std::string fill(const PromptTemplate& tmpl, const SlotValues& v) {
  const std::pair<std::string_view, std::string_view> table[] = {
      {kVocabularySlot, v.vocabulary}, {kProcessedSlot, v.processed}, {kExtractedSlot, v.extracted},
      {kCurrentSlot, v.current},       {kFollowingSlot, v.following}, {kSnippetIdSlot, v.snippet_id},
  };
  std::string out;
  for (const auto& part : tmpl.parts()) {
    out += "# ";
    std::string_view pieces[] = {part.heading, "\n", part.body};
    for (std::string_view s : pieces) {
      std::size_t i = 0;
      while (i < s.size()) {
        auto open = s.find("{{", i);
        if (open == std::string_view::npos) {
          out.append(s.substr(i));
          break;
        }
        out.append(s.substr(i, open - i));
        bool replaced = false;
        for (const auto& [key, value] : table) {
          if (s.substr(open, key.size()) == key) {
            out.append(value);
            i = open + key.size();
            replaced = true;
            break;
          }
        }
        if (!replaced) {
          out.append("{{");
          i = open + 2;
        }
      }
    }
  }
  return out;
}

struct Prepared {
  SlotValues values;
  std::string vocabulary;
  std::string extracted;
  std::string processed_full;
  bool first = false;
  std::size_t fixed = 0;  // prompt size with an empty part 3
};

Prepared prepare(const AssembleInput& in, std::uint32_t snippet) {
  const auto* current = in.doc.find(snippet);
  if (!current) throw latex::SplitError("UnknownSnippet", "unknown snippet " + std::to_string(snippet));
  Prepared p;
  p.vocabulary = in.vocab.describe();
  fnl::Document earlier;
  for (const auto& [id, block] : in.fnl_so_far.blocks) {
    if (id < snippet) earlier.blocks.emplace(id, block);
  }
  p.extracted = fnl::serialize_fnl(earlier);
  auto ctx = latex::snippet_context(in.doc, snippet, static_cast<std::size_t>(-1));
  p.processed_full = std::move(ctx.processed);
  p.first = p.processed_full.empty();

  p.values.vocabulary = p.vocabulary;
  p.values.extracted = p.extracted.empty() ? kNoStatements : std::string_view(p.extracted);
  p.values.current = current->body;
  p.values.following = kNoFollowing;
  for (std::size_t i = 0; i + 1 < in.doc.snippets.size(); ++i) {
    if (in.doc.snippets[i].id == snippet) p.values.following = in.doc.snippets[i + 1].body;
  }
  p.values.snippet_id = std::to_string(snippet);
  p.values.processed = {};
  p.fixed = fill(in.tmpl, p.values).size();
  return p;
}

std::size_t minimum_of(const Prepared& p) {
  if (p.first) return p.fixed + kNothingProcessed.size();
  return p.fixed + std::min(p.processed_full.size(), latex::kTruncationMarker.size());
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate t;
  std::size_t line_no = 0;
  for (auto line : text::split(text, '\n')) {
    ++line_no;
    if (text::starts_with(line, "# ")) {
      t.parts_.push_back(TemplatePart{std::string(text::trim(line.substr(2))), {}});
      continue;
    }
    if (t.parts_.empty()) {
      if (!text::trim(line).empty()) {
        throw Error("BadTemplate", "line " + std::to_string(line_no) + ": text before the first '# ' heading");
      }
      continue;
    }
    t.parts_.back().body += line;
    t.parts_.back().body += '\n';
  }
  // split() yields one trailing empty piece for text ending in '\n'.
  if (!t.parts_.empty() && !text.empty() && text.back() == '\n') t.parts_.back().body.pop_back();
  if (t.parts_.size() != kPartCount) {
    throw Error("BadTemplate", "expected " + std::to_string(kPartCount) + " '# ' headed parts, found " +
                                   std::to_string(t.parts_.size()));
  }
  for (std::size_t s = 0; s < std::size(kSlots); ++s) {
    std::size_t total = 0;
    for (const auto& part : t.parts_) total += count_of(part.heading, kSlots[s]) + count_of(part.body, kSlots[s]);
    const auto& home = t.parts_[s + 2];
    if (total != 1 || count_of(home.body, kSlots[s]) != 1) {
      throw Error("BadTemplate", std::string(kSlots[s]) + " must appear exactly once, in the body of part " +
                                     std::to_string(s + 3));
    }
  }
  return t;
}

const PromptTemplate& PromptTemplate::builtin() {
  static const PromptTemplate t = parse(defaults::prompt_template());
  return t;
}

PromptBundle make_bundle(std::uint32_t snippet_id, std::string model, std::string text) {
  PromptBundle b;
  b.snippet_id = snippet_id;
  b.content_hash = text::sha256_hex(model + '\0' + text);
  b.model = std::move(model);
  b.text = std::move(text);
  return b;
}

std::size_t minimum_budget(const AssembleInput& in, std::uint32_t snippet) { return minimum_of(prepare(in, snippet)); }

PromptBundle assemble_prompt(const AssembleInput& in, std::uint32_t snippet, std::size_t budget) {
  auto p = prepare(in, snippet);
  auto minimum = minimum_of(p);
  if (budget < minimum) {
    throw Error("BudgetTooSmall", "budget " + std::to_string(budget) + " is below the minimum of " +
                                      std::to_string(minimum) + " bytes for snippet " + std::to_string(snippet));
  }
  std::string processed;
  if (p.first) {
    p.values.processed = kNothingProcessed;
  } else {
    processed = latex::snippet_context(in.doc, snippet, budget - p.fixed).processed;
    p.values.processed = processed;
  }
  return make_bundle(snippet, in.model, fill(in.tmpl, p.values));
}

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Live: return "live";
    case Mode::Record: return "record";
    case Mode::Replay: return "replay";
  }
  return "?";
}

std::optional<Mode> mode_from_string(std::string_view s) {
  if (s == "live") return Mode::Live;
  if (s == "record") return Mode::Record;
  if (s == "replay") return Mode::Replay;
  return std::nullopt;
}

std::string strip_code_fences(std::string_view response) {
  auto body = text::trim(response);
  if (!text::starts_with(body, "```")) return std::string(response);
  auto first_nl = body.find('\n');
  if (first_nl == std::string_view::npos) return {};
  body = body.substr(first_nl + 1);
  auto trimmed = text::trim_right(body);
  auto last_nl = trimmed.rfind('\n');
  auto last_line = last_nl == std::string_view::npos ? trimmed : trimmed.substr(last_nl + 1);
  if (text::trim(last_line) == "```") {
    body = last_nl == std::string_view::npos ? std::string_view{} : trimmed.substr(0, last_nl + 1);
  }
  return std::string(body);
}

ResponseUnparseable::ResponseUnparseable(std::uint32_t snippet, std::string raw,
                                         std::vector<fnl::Diagnostic> diagnostics)
    : Error("ResponseUnparseable", "response for snippet " + std::to_string(snippet) + " is not valid FNL"),
      raw_(std::move(raw)),
      diagnostics_(std::move(diagnostics)) {}

Extraction extract_snippet_fnl(const PromptBundle& bundle, const LlmClient& client, const fnl::Vocabulary& vocab) {
  auto response = client.complete(bundle);
  auto stripped = strip_code_fences(response.text);
  // Keep diagnostics pointing into the raw response.
  std::size_t offset = 0;
  if (stripped != response.text) {
    auto lead = response.text.find("```");
    offset = static_cast<std::size_t>(std::count(response.text.begin(), response.text.begin() + lead, '\n')) + 1;
  }
  auto parsed = fnl::parse_block(stripped, vocab, bundle.snippet_id);
  for (auto& d : parsed.diagnostics) d.line += offset;
  if (!parsed.ok()) throw ResponseUnparseable(bundle.snippet_id, response.text, std::move(parsed.diagnostics));
  Extraction out;
  out.block = std::move(parsed.document.blocks.at(bundle.snippet_id));
  out.raw = std::move(response.text);
  out.diagnostics = std::move(parsed.diagnostics);
  return out;
}

}  // namespace semforge::prompting
