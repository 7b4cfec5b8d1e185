#pragma once

#include <string>
#include <vector>

#include "muse/error.hpp"

namespace muse {

enum class Role { system, user, assistant };

inline const char* to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

inline Role role_from_string(const std::string& s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw MuseError(ErrorKind::config, "unknown chat role: " + s);
}

struct ChatMessage {
  Role role = Role::user;
  std::string text;
};

struct GenerationRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.7;
  int max_tokens = 1024;
  std::string model_name;
  bool use_cache = false;   // caller opts in per request; search wants fresh samples
  std::string purpose;      // metadata for traces ("evaluate", "generate", ...); not part of the cache key

  static GenerationRequest single_user(std::string prompt) {
    GenerationRequest req;
    req.messages.push_back({Role::user, std::move(prompt)});
    return req;
  }

  void validate() const {
    if (messages.empty())
      throw MuseError(ErrorKind::config, "request has no messages");
    for (const auto& m : messages)
      if (m.text.empty())
        throw MuseError(ErrorKind::config, "empty chat message");
    if (temperature < 0.0 || temperature > 2.0)
      throw MuseError(ErrorKind::config, "temperature out of [0,2]");
    if (max_tokens <= 0)
      throw MuseError(ErrorKind::config, "max_tokens must be positive");
  }

  // Concatenated message text, used by scripted matchers and token fallbacks.
  std::string joined_text() const {
    std::string out;
    for (const auto& m : messages) {
      if (!out.empty()) out += '\n';
      out += m.text;
    }
    return out;
  }
};

struct ModelResponse {
  std::string text;
  long input_tokens = 0;
  long output_tokens = 0;
  bool cached = false;
  bool usage_approximate = false; // provider omitted usage; counts are whitespace estimates
};

// Whitespace token approximation, used when a provider reports no usage.
inline long approx_token_count(const std::string& text) {
  long count = 0;
  bool in_token = false;
  for (char c : text) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!ws && !in_token) ++count;
    in_token = !ws;
  }
  return count;
}

} // namespace muse
