#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace muse {

// Every recoverable failure in the library is a MuseError tagged with one of
// these kinds. Contract violations (caller bugs) throw std::logic_error via
// MUSE_EXPECTS instead.
enum class ErrorKind {
  config,            // bad run configuration / CLI usage
  fixture,           // unreadable or malformed fixture file
  parse,             // model reply did not match the expected grammar
  evaluation_parse,  // evaluation reply unparseable after retries
  generation_failed, // every candidate of an expansion failed to parse
  invalid_node,      // unknown node identifier
  backend_unavailable,
  request,           // non-retryable HTTP 4xx
  script_exhausted,  // scripted backend has no matching entry left
  no_progress,       // every rollout of a search failed
  integrity,         // trace replay found an inconsistency
  undefined_input,   // e.g. coverage over an empty concept set
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::fixture: return "fixture";
    case ErrorKind::parse: return "parse";
    case ErrorKind::evaluation_parse: return "evaluation-parse";
    case ErrorKind::generation_failed: return "generation-failed";
    case ErrorKind::invalid_node: return "invalid-node";
    case ErrorKind::backend_unavailable: return "backend-unavailable";
    case ErrorKind::request: return "request";
    case ErrorKind::script_exhausted: return "script-exhausted";
    case ErrorKind::no_progress: return "no-progress";
    case ErrorKind::integrity: return "integrity";
    case ErrorKind::undefined_input: return "undefined-input";
  }
  return "unknown";
}

class MuseError : public std::runtime_error {
 public:
  MuseError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  MuseError(ErrorKind kind, const std::string& message, std::size_t offset)
      : std::runtime_error(std::string(to_string(kind)) + " at offset " +
                           std::to_string(offset) + ": " + message),
        kind_(kind),
        offset_(offset) {}

  ErrorKind kind() const { return kind_; }

  // Byte offset of the first mismatch, for parse errors.
  std::size_t offset() const { return offset_; }

  // Raw model text or other payload attached for diagnostics.
  const std::string& detail() const { return detail_; }
  MuseError& with_detail(std::string detail) {
    detail_ = std::move(detail);
    return *this;
  }

 private:
  ErrorKind kind_;
  std::size_t offset_ = 0;
  std::string detail_;
};

class ParseError : public MuseError {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : MuseError(ErrorKind::parse, message, offset) {}
};

} // namespace muse

// Preconditions are programmer errors, not runtime conditions.
#define MUSE_EXPECTS(cond)                                                     \
  do {                                                                         \
    if (!(cond)) throw std::logic_error("contract failure: " #cond);           \
  } while (0)
