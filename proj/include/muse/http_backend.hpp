#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "muse/backend.hpp"

namespace muse {

// Connection settings for a chat-completions endpoint. The credential is read
// from an environment variable and never stored in config snapshots or logs.
struct HttpBackendConfig {
  std::string base_url = "http://localhost:8080";
  std::string path = "/v1/chat/completions";
  std::string credential_env = "MUSE_API_KEY";
  int max_attempts = 3;
  int backoff_initial_ms = 250;
  int timeout_seconds = 120;
};

// Speaks the de-facto chat-completions shape: messages array in, choices
// array out, usage object with prompt/completion token counts. Transport
// failures and 429/5xx retry with exponential backoff; other 4xx are
// non-retryable request errors.
class HttpBackend : public ModelBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

  long transport_calls() const override { return transport_calls_.load(); }
  bool supports_concurrency() const override { return true; }

 protected:
  ModelResponse perform(const GenerationRequest& request) override {
    const std::string body = build_body(request).dump();
    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
      if (attempt > 0) {
        auto delay = std::chrono::milliseconds(config_.backoff_initial_ms << (attempt - 1));
        std::this_thread::sleep_for(delay);
      }
      transport_calls_.fetch_add(1);
      httplib::Client client(config_.base_url);
      client.set_read_timeout(config_.timeout_seconds, 0);
      client.set_connection_timeout(10, 0);
      httplib::Headers headers;
      if (const char* cred = std::getenv(config_.credential_env.c_str()); cred && *cred)
        headers.emplace("Authorization", std::string("Bearer ") + cred);
      auto res = client.Post(config_.path, headers, body, "application/json");
      if (!res) {
        last_error = "transport: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "status " + std::to_string(res->status);
        continue;
      }
      if (res->status >= 400)
        throw MuseError(ErrorKind::request,
                        "HTTP " + std::to_string(res->status) + ": " + res->body);
      return parse_body(res->body, approx_token_count(request.joined_text()));
    }
    throw MuseError(ErrorKind::backend_unavailable,
                    "gave up after " + std::to_string(config_.max_attempts) +
                        " attempts (" + last_error + ")");
  }

 private:
  nlohmann::json build_body(const GenerationRequest& request) const {
    nlohmann::json body;
    body["model"] = request.model_name;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    auto messages = nlohmann::json::array();
    for (const auto& m : request.messages)
      messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
    body["messages"] = messages;
    return body;
  }

  static ModelResponse parse_body(const std::string& body, long prompt_token_fallback) {
    auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded())
      throw MuseError(ErrorKind::request, "response is not JSON").with_detail(body);
    ModelResponse response;
    try {
      response.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw MuseError(ErrorKind::request, "response missing choices[0].message.content")
          .with_detail(body);
    }
    if (doc.contains("usage") && doc["usage"].is_object()) {
      response.input_tokens = doc["usage"].value("prompt_tokens", 0L);
      response.output_tokens = doc["usage"].value("completion_tokens", 0L);
    } else {
      response.input_tokens = prompt_token_fallback;
      response.output_tokens = approx_token_count(response.text);
      response.usage_approximate = true;
    }
    return response;
  }

  HttpBackendConfig config_;
  std::atomic<long> transport_calls_{0};
};

} // namespace muse
