#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <nlohmann/json.hpp>
#include <regex>
#include <thread>

#include "semforge/prompting.hpp"
#include "semforge/text.hpp"

namespace semforge::prompting {

using nlohmann::json;

std::string HttpTransport::post(const std::string& url, const std::string& json_body, const std::string& api_key) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw LlmError("ServiceRejected", "bad endpoint URL '" + url + "'");
  httplib::Client client(m[1].str());
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
  std::string path = m[2].matched ? m[2].str() : "/";
  auto res = client.Post(path, headers, json_body, "application/json");
  if (!res) throw LlmError("TransportError", "request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw LlmError("TransportError", "service answered HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw LlmError("ServiceRejected", "service answered HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  return res->body;
}

std::string request_body(const PromptBundle& bundle) {
  json body = {
      {"model", bundle.model},
      {"messages", json::array({{{"role", "user"}, {"content", bundle.text}}})},
      {"temperature", 0},
  };
  return body.dump();
}

std::string response_text(std::string_view json_body) {
  json doc = json::parse(json_body, nullptr, false);
  if (doc.is_discarded()) throw LlmError("ServiceRejected", "service response is not JSON");
  try {
    const auto& choice = doc.at("choices").at(0);
    if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const json::exception&) {
    throw LlmError("ServiceRejected", "service response has no choices[0].message.content or choices[0].text");
  }
}

LlmClient::LlmClient(ClientOptions options, std::shared_ptr<Transport> transport)
    : options_(std::move(options)), transport_(std::move(transport)) {
  if (!options_.api_key) {
    if (const char* env = std::getenv(kApiKeyEnv)) options_.api_key = env;
  }
  if (!transport_) transport_ = std::make_shared<HttpTransport>();
  if (options_.max_attempts < 1) options_.max_attempts = 1;
}

std::filesystem::path LlmClient::cache_path(std::string_view hash) const {
  std::string name(hash);
  return options_.cache_dir / name.substr(0, 2) / (name + ".json");
}

std::optional<std::string> LlmClient::cached(std::string_view hash) const {
  auto path = cache_path(hash);
  if (!std::filesystem::exists(path)) return std::nullopt;
  json entry = json::parse(text::read_file(path), nullptr, false);
  if (entry.is_discarded() || !entry.contains("response") || !entry["response"].contains("text") ||
      !entry["response"]["text"].is_string()) {
    throw LlmError("CacheCorrupt", "unreadable cache entry " + path.string());
  }
  return entry["response"]["text"].get<std::string>();
}

void LlmClient::store(const PromptBundle& bundle, const std::string& response) const {
  json entry = {
      {"content_hash", bundle.content_hash},
      {"snippet_id", bundle.snippet_id},
      {"model", bundle.model},
      {"request", json::parse(request_body(bundle))},
      {"response", {{"text", response}}},
  };
  text::write_file(cache_path(bundle.content_hash), entry.dump(2) + "\n");
}

std::string LlmClient::call_service(const PromptBundle& bundle) const {
  if (!options_.api_key || options_.api_key->empty()) {
    throw LlmError("AuthMissing", std::string("no API key: set ") + kApiKeyEnv);
  }
  if (options_.endpoint.empty()) throw LlmError("EndpointMissing", "no LLM endpoint configured");
  auto body = request_body(bundle);
  auto delay = options_.backoff;
  std::string last;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    try {
      return response_text(transport_->post(options_.endpoint, body, *options_.api_key));
    } catch (const LlmError& e) {
      if (e.code() != "TransportError") throw;
      last = e.what();
    }
    if (attempt < options_.max_attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw LlmError("TransportError",
                 "giving up after " + std::to_string(options_.max_attempts) + " attempts; last error: " + last);
}

LlmResponse LlmClient::complete(const PromptBundle& bundle) const {
  LlmResponse out;
  out.model = bundle.model;
  out.content_hash = bundle.content_hash;
  if (options_.mode == Mode::Replay) {
    auto hit = cached(bundle.content_hash);
    if (!hit) {
      throw LlmError("CacheMiss", "CacheMiss: no cached response for prompt " + bundle.content_hash +
                                      " (snippet " + std::to_string(bundle.snippet_id) + ")");
    }
    out.text = std::move(*hit);
    out.mode = Mode::Replay;
    return out;
  }
  out.text = call_service(bundle);
  out.mode = Mode::Live;
  if (options_.mode == Mode::Record) store(bundle, out.text);
  return out;
}

}  // namespace semforge::prompting
