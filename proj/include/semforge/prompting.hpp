#pragma once

// Seven-part extraction prompt and an LLM client with a content-addressed
// record/replay cache.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semforge/error.hpp"
#include "semforge/fnl.hpp"
#include "semforge/latex_ingest.hpp"

namespace semforge::prompting {

inline constexpr std::size_t kPartCount = 7;

// Placeholders. The four slot placeholders must each appear exactly once,
// in parts 3, 4, 5 and 6 respectively; {{vocabulary}} and {{snippet_id}} may
// appear anywhere.
inline constexpr std::string_view kProcessedSlot = "{{processed_latex}}";
inline constexpr std::string_view kExtractedSlot = "{{extracted_fnl}}";
inline constexpr std::string_view kCurrentSlot = "{{current_snippet}}";
inline constexpr std::string_view kFollowingSlot = "{{following_snippet}}";
inline constexpr std::string_view kVocabularySlot = "{{vocabulary}}";
inline constexpr std::string_view kSnippetIdSlot = "{{snippet_id}}";

// Stand-ins for empty slots, so the model never sees a bare heading.
inline constexpr std::string_view kNothingProcessed = "(nothing processed yet)\n";
inline constexpr std::string_view kNoStatements = "(no statements extracted yet)\n";
inline constexpr std::string_view kNoFollowing = "(none: the new snippet is the last one)\n";

struct TemplatePart {
  std::string heading;  // text after "# "
  std::string body;     // lines up to the next heading, with line breaks
};

class PromptTemplate {
 public:
  // The text must consist of exactly seven `# ` headed parts. Throws
  // Error("BadTemplate").
  static PromptTemplate parse(std::string_view text);
  static const PromptTemplate& builtin();

  const std::vector<TemplatePart>& parts() const { return parts_; }

 private:
  std::vector<TemplatePart> parts_;
};

struct PromptBundle {
  std::uint32_t snippet_id = 0;
  std::string model;
  std::string text;
  std::string content_hash;  // sha256 of model + '\0' + text, hex
};

PromptBundle make_bundle(std::uint32_t snippet_id, std::string model, std::string text);

struct AssembleInput {
  const PromptTemplate& tmpl;
  const latex::SourceDocument& doc;
  const fnl::Document& fnl_so_far;  // only blocks with id < snippet are used
  const fnl::Vocabulary& vocab;
  std::string model;
};

// Smallest budget (bytes) for which assemble_prompt succeeds for `snippet`.
std::size_t minimum_budget(const AssembleInput& in, std::uint32_t snippet);

// Only part 3 is ever shortened (from the front); everything else is kept
// whole. Throws Error("BudgetTooSmall") / SplitError("UnknownSnippet").
PromptBundle assemble_prompt(const AssembleInput& in, std::uint32_t snippet, std::size_t budget);

enum class Mode { Live, Record, Replay };
std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view s);

inline constexpr const char* kApiKeyEnv = "SEMFORGE_LLM_API_KEY";

class LlmError : public Error {
 public:
  using Error::Error;
};

struct LlmResponse {
  std::string text;
  Mode mode = Mode::Replay;  // Live for fresh service answers, Replay for cache hits
  std::string model;
  std::string content_hash;
};

// One HTTP exchange. Implementations throw LlmError("TransportError") for
// failures worth retrying and LlmError("ServiceRejected") for the rest.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string post(const std::string& url, const std::string& json_body, const std::string& api_key) = 0;
};

// cpp-httplib based; http and https endpoints.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(120)) : timeout_(timeout) {}
  std::string post(const std::string& url, const std::string& json_body, const std::string& api_key) override;

 private:
  std::chrono::seconds timeout_;
};

struct ClientOptions {
  Mode mode = Mode::Replay;
  std::string endpoint;
  std::string model;
  std::filesystem::path cache_dir;
  std::optional<std::string> api_key;  // falls back to $SEMFORGE_LLM_API_KEY
  int max_attempts = 3;
  std::chrono::milliseconds backoff{500};  // doubled after every failed attempt
};

// The request body sent for `bundle`: {model, messages, temperature: 0}.
std::string request_body(const PromptBundle& bundle);
// Pulls the completion text out of a chat or completion style response.
std::string response_text(std::string_view json_body);

// Safe to share between threads; cache writes are atomic per entry.
class LlmClient {
 public:
  explicit LlmClient(ClientOptions options, std::shared_ptr<Transport> transport = nullptr);

  // Throws LlmError: CacheMiss, AuthMissing, TransportError, ServiceRejected.
  LlmResponse complete(const PromptBundle& bundle) const;

  std::filesystem::path cache_path(std::string_view hash) const;
  std::optional<std::string> cached(std::string_view hash) const;

  const ClientOptions& options() const { return options_; }

 private:
  std::string call_service(const PromptBundle& bundle) const;
  void store(const PromptBundle& bundle, const std::string& response) const;

  ClientOptions options_;
  std::shared_ptr<Transport> transport_;
};

// Strips a surrounding ``` fence (with optional info string), if any.
std::string strip_code_fences(std::string_view response);

class ResponseUnparseable : public Error {
 public:
  ResponseUnparseable(std::uint32_t snippet, std::string raw, std::vector<fnl::Diagnostic> diagnostics);
  const std::string& raw() const { return raw_; }
  const std::vector<fnl::Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::string raw_;
  std::vector<fnl::Diagnostic> diagnostics_;
};

struct Extraction {
  fnl::Block block;
  std::string raw;  // response text as received
  std::vector<fnl::Diagnostic> diagnostics;  // warnings only
};

Extraction extract_snippet_fnl(const PromptBundle& bundle, const LlmClient& client, const fnl::Vocabulary& vocab);

}  // namespace semforge::prompting
