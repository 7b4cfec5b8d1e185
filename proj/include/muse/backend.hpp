#pragma once

#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "muse/chat.hpp"
#include "muse/error.hpp"
#include "muse/usage.hpp"

namespace muse {

// ============================================================================
// Response cache
// ============================================================================

// Stable key over everything that determines a completion. The purpose and
// use_cache fields are metadata and deliberately excluded.
inline std::string cache_key(const GenerationRequest& req) {
  nlohmann::json doc;
  doc["model"] = req.model_name;
  doc["temperature"] = req.temperature;
  doc["max_tokens"] = req.max_tokens;
  auto msgs = nlohmann::json::array();
  for (const auto& m : req.messages)
    msgs.push_back({{"role", to_string(m.role)}, {"text", m.text}});
  doc["messages"] = msgs;
  return std::to_string(std::hash<std::string>{}(doc.dump()));
}

// Append-friendly file of request-hash -> response records, one JSON object
// per line. Missing file is an empty cache.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::string path) : path_(std::move(path)) { load(); }

  std::optional<ModelResponse> lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    ModelResponse r = it->second;
    r.cached = true; // cached responses carry the original token counts
    return r;
  }

  void store(const std::string& key, const ModelResponse& response) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (entries_.count(key)) return;
    entries_[key] = response;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    nlohmann::json line = {{"key", key},
                           {"text", response.text},
                           {"input_tokens", response.input_tokens},
                           {"output_tokens", response.output_tokens},
                           {"approx", response.usage_approximate}};
    out << line.dump() << '\n';
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

 private:
  void load() {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto doc = nlohmann::json::parse(line, nullptr, false);
      if (doc.is_discarded()) continue;
      ModelResponse r;
      r.text = doc.value("text", "");
      r.input_tokens = doc.value("input_tokens", 0L);
      r.output_tokens = doc.value("output_tokens", 0L);
      r.usage_approximate = doc.value("approx", false);
      entries_[doc.value("key", "")] = r;
    }
  }

  std::string path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, ModelResponse> entries_;
};

// ============================================================================
// Backend base
// ============================================================================

// Chat-completion provider. complete() owns the cache and ledger bookkeeping;
// concrete backends implement perform(). Cache hits never touch the ledger,
// and retries inside perform() record tokens only for the final success.
class ModelBackend {
 public:
  using CallListener =
      std::function<void(const GenerationRequest&, const ModelResponse&)>;

  virtual ~ModelBackend() = default;

  ModelResponse complete(const GenerationRequest& request) {
    request.validate();
    if (request.use_cache && cache_) {
      if (auto hit = cache_->lookup(cache_key(request))) {
        notify(request, *hit);
        return *hit;
      }
    }
    ModelResponse response = perform(request);
    ledger_.record(request.model_name, response.input_tokens,
                   response.output_tokens, response.usage_approximate);
    if (cache_) cache_->store(cache_key(request), response);
    notify(request, response);
    return response;
  }

  void attach_cache(std::shared_ptr<ResponseCache> cache) { cache_ = std::move(cache); }
  void set_call_listener(CallListener listener) {
    std::lock_guard<std::mutex> lock(listener_mutex_);
    listener_ = std::move(listener);
  }

  UsageLedger& ledger() { return ledger_; }
  const UsageLedger& ledger() const { return ledger_; }

  // Number of raw transport operations performed. Scripted runs must keep
  // this at zero.
  virtual long transport_calls() const { return 0; }

  virtual bool supports_concurrency() const { return false; }

 protected:
  virtual ModelResponse perform(const GenerationRequest& request) = 0;

 private:
  void notify(const GenerationRequest& req, const ModelResponse& resp) {
    CallListener listener;
    {
      std::lock_guard<std::mutex> lock(listener_mutex_);
      listener = listener_;
    }
    if (listener) listener(req, resp);
  }

  UsageLedger ledger_;
  std::shared_ptr<ResponseCache> cache_;
  std::mutex listener_mutex_;
  CallListener listener_;
};

// ============================================================================
// Scripted backend
// ============================================================================

// Deterministic stand-in replaying pre-authored responses. An entry matches
// either unconditionally in order ("next") or when the joined prompt contains
// its substring. Entries are consumed front to back; the first unconsumed
// match wins.
class ScriptedBackend : public ModelBackend {
 public:
  struct Entry {
    std::string substring; // empty = "next" (matches any request)
    std::string reply;
    std::optional<long> input_tokens;
    std::optional<long> output_tokens;
  };

  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<Entry> entries) : entries_(std::move(entries)) {
    consumed_.assign(entries_.size(), false);
  }

  ScriptedBackend& reply_next(std::string reply) {
    entries_.push_back({"", std::move(reply), std::nullopt, std::nullopt});
    consumed_.push_back(false);
    return *this;
  }

  ScriptedBackend& reply_when(std::string substring, std::string reply) {
    entries_.push_back({std::move(substring), std::move(reply), std::nullopt, std::nullopt});
    consumed_.push_back(false);
    return *this;
  }

  static std::vector<Entry> entries_from_json(const nlohmann::json& doc) {
    std::vector<Entry> entries;
    for (const auto& item : doc) {
      Entry e;
      if (item.contains("match") && item["match"].is_object())
        e.substring = item["match"].value("substring", "");
      else if (item.contains("substring"))
        e.substring = item["substring"].get<std::string>();
      e.reply = item.at("reply").get<std::string>();
      if (item.contains("input_tokens")) e.input_tokens = item["input_tokens"].get<long>();
      if (item.contains("output_tokens")) e.output_tokens = item["output_tokens"].get<long>();
      entries.push_back(std::move(e));
    }
    return entries;
  }

  static std::unique_ptr<ScriptedBackend> load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MuseError(ErrorKind::config, "cannot read script: " + path);
    nlohmann::json doc;
    in >> doc;
    return std::make_unique<ScriptedBackend>(entries_from_json(doc));
  }

  std::size_t remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::size_t n = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (!consumed_[i]) ++n;
    return n;
  }

 protected:
  ModelResponse perform(const GenerationRequest& request) override {
    std::lock_guard<std::mutex> lock(mutex_);
    const std::string prompt = request.joined_text();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (consumed_[i]) continue;
      const Entry& e = entries_[i];
      if (!e.substring.empty() && prompt.find(e.substring) == std::string::npos)
        continue;
      consumed_[i] = true;
      ModelResponse r;
      r.text = e.reply;
      r.input_tokens = e.input_tokens.value_or(approx_token_count(prompt));
      r.output_tokens = e.output_tokens.value_or(approx_token_count(e.reply));
      return r;
    }
    throw MuseError(ErrorKind::script_exhausted,
                    "no scripted entry matches request (purpose=" + request.purpose + ")")
        .with_detail(prompt.substr(0, 200));
  }

 private:
  std::vector<Entry> entries_;
  std::vector<bool> consumed_;
  mutable std::mutex mutex_;
};

} // namespace muse
