#pragma once

/**
 * Centralized grammars for the structured reply formats the tasks expect:
 * holistic scores, itemized findings, crossword candidate lines, improvement
 * verdicts, numbered lists, fenced code blocks, and the arithmetic-check JSON
 * verdict. Keyword matching is case-insensitive, whitespace is tolerated, and
 * every pattern is anchored per line. Failures throw ParseError carrying the
 * byte offset of the first mismatch; there is no partial silent success.
 *
 * Each grammar has a matching render_* so structures survive a
 * render -> parse round trip.
 */

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "muse/error.hpp"
#include "muse/feedback.hpp"

namespace muse {

// ============================================================================
// Scanner
// ============================================================================

namespace scan {

inline bool ieq(char a, char b) {
  return std::tolower(static_cast<unsigned char>(a)) ==
         std::tolower(static_cast<unsigned char>(b));
}

// Cursor over one line; pos is relative to the line start.
struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char peek() const { return done() ? '\0' : text[pos]; }

  void skip_ws() {
    while (!done() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  bool accept(char c) {
    if (done() || text[pos] != c) return false;
    ++pos;
    return true;
  }

  // Case-insensitive keyword.
  bool accept_keyword(std::string_view kw) {
    if (text.size() - pos < kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i)
      if (!ieq(text[pos + i], kw[i])) return false;
    pos += kw.size();
    return true;
  }

  std::optional<long> accept_int() {
    std::size_t start = pos;
    if (!done() && text[pos] == '-') ++pos;
    std::size_t digits = pos;
    while (!done() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == digits) {
      pos = start;
      return std::nullopt;
    }
    return std::stol(std::string(text.substr(start, pos - start)));
  }

  // Consumes up to (excluding) the terminator; fails if absent.
  std::optional<std::string> accept_until(char terminator) {
    auto end = text.find(terminator, pos);
    if (end == std::string_view::npos) return std::nullopt;
    std::string out(text.substr(pos, end - pos));
    pos = end;
    return out;
  }

  std::string rest() {
    std::string out(text.substr(pos));
    pos = text.size();
    return out;
  }
};

struct Line {
  std::string_view text;
  std::size_t offset; // absolute byte offset of the line start
};

inline std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) {
      lines.push_back({std::string_view(text).substr(start), start});
      break;
    }
    lines.push_back({std::string_view(text).substr(start, end - start), start});
    start = end + 1;
  }
  return lines;
}

inline std::string trim(std::string s) {
  auto not_ws = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_ws));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_ws).base(), s.end());
  return s;
}

// Runs a per-line parser over every line, collecting matches. When nothing
// matches, throws ParseError at the furthest offset any attempt reached.
template <typename T, typename Parser>
std::vector<T> collect(const std::string& text, const char* what, Parser parser) {
  std::vector<T> found;
  std::size_t furthest = 0;
  for (const Line& line : split_lines(text)) {
    Cursor cur{line.text};
    if (auto value = parser(cur)) {
      found.push_back(std::move(*value));
    } else {
      furthest = std::max(furthest, line.offset + cur.pos);
    }
  }
  if (found.empty())
    throw ParseError(std::string("no ") + what + " line found", furthest);
  return found;
}

} // namespace scan

// ============================================================================
// Holistic score: "[score: 50] [reason] the current outline is too predictable"
// ============================================================================

struct HolisticScore {
  int score = 0;
  std::string reason;

  bool operator==(const HolisticScore&) const = default;
};

namespace detail {

inline std::optional<HolisticScore> try_holistic_line(scan::Cursor& cur) {
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept_keyword("score")) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept(':')) return std::nullopt;
  cur.skip_ws();
  auto score = cur.accept_int();
  if (!score) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept(']')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept_keyword("reason")) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept(']')) return std::nullopt;
  cur.skip_ws();
  return HolisticScore{static_cast<int>(*score), scan::trim(cur.rest())};
}

} // namespace detail

inline HolisticScore parse_holistic_score(const std::string& text) {
  return scan::collect<HolisticScore>(text, "[score: N] [reason]",
                                      detail::try_holistic_line)
      .front();
}

inline std::string render_holistic_score(const HolisticScore& s) {
  return "[score: " + std::to_string(s.score) + "] [reason] " + s.reason;
}

// ============================================================================
// Itemized finding: "[reason: too repetitive] [9]-[10] [interesting level: 5]"
// ============================================================================

namespace detail {

inline std::optional<ItemizedFinding> try_finding_line(scan::Cursor& cur) {
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept_keyword("reason")) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept(':')) return std::nullopt;
  cur.skip_ws();
  auto reason = cur.accept_until(']');
  if (!reason) return std::nullopt;
  cur.accept(']');
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  auto start = cur.accept_int();
  if (!start || !cur.accept(']')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept('-')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  auto end = cur.accept_int();
  if (!end || !cur.accept(']')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept_keyword("interesting level")) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept(':')) return std::nullopt;
  cur.skip_ws();
  auto level = cur.accept_int();
  if (!level || !cur.accept(']')) return std::nullopt;
  ItemizedFinding finding;
  finding.reason = scan::trim(*reason);
  finding.start_index = static_cast<int>(*start);
  finding.end_index = static_cast<int>(*end);
  finding.level = static_cast<int>(*level);
  return finding;
}

} // namespace detail

inline std::vector<ItemizedFinding> parse_itemized_findings(const std::string& text) {
  return scan::collect<ItemizedFinding>(text, "[reason: ...] [i]-[j] [interesting level: n]",
                                        detail::try_finding_line);
}

inline std::string render_itemized_finding(const ItemizedFinding& f) {
  return "[reason: " + f.reason + "] [" + std::to_string(f.start_index) + "]-[" +
         std::to_string(f.end_index) + "] [interesting level: " +
         std::to_string(f.level) + "]";
}

// ============================================================================
// Crossword candidate: "h2. [Fatuous; empty headed: _____] INANE (high)"
// ============================================================================

enum class Confidence { low = 0, medium = 1, high = 2, certain = 3 };

inline const char* to_string(Confidence c) {
  switch (c) {
    case Confidence::low: return "low";
    case Confidence::medium: return "medium";
    case Confidence::high: return "high";
    case Confidence::certain: return "certain";
  }
  return "low";
}

struct CrosswordCandidate {
  std::string slot;   // "h1".."h5", "v1".."v5"
  std::string answer; // uppercased letters
  Confidence confidence = Confidence::low;

  bool operator==(const CrosswordCandidate&) const = default;
};

namespace detail {

inline std::optional<std::string> try_slot(scan::Cursor& cur) {
  cur.skip_ws();
  char kind = cur.peek();
  if (kind != 'h' && kind != 'v' && kind != 'H' && kind != 'V') return std::nullopt;
  ++cur.pos;
  char digit = cur.peek();
  if (digit < '1' || digit > '5') return std::nullopt;
  ++cur.pos;
  std::string slot{static_cast<char>(std::tolower(static_cast<unsigned char>(kind))), digit};
  return slot;
}

inline std::optional<CrosswordCandidate> try_crossword_candidate_line(scan::Cursor& cur) {
  auto slot = try_slot(cur);
  if (!slot || !cur.accept('.')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  if (!cur.accept_until(']')) return std::nullopt;
  cur.accept(']');
  cur.skip_ws();
  std::string answer;
  while (std::isalpha(static_cast<unsigned char>(cur.peek()))) {
    answer += static_cast<char>(std::toupper(static_cast<unsigned char>(cur.peek())));
    ++cur.pos;
  }
  if (answer.empty()) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept('(')) return std::nullopt;
  cur.skip_ws();
  Confidence conf;
  if (cur.accept_keyword("certain")) conf = Confidence::certain;
  else if (cur.accept_keyword("high")) conf = Confidence::high;
  else if (cur.accept_keyword("medium")) conf = Confidence::medium;
  else if (cur.accept_keyword("low")) conf = Confidence::low;
  else return std::nullopt;
  cur.skip_ws();
  if (!cur.accept(')')) return std::nullopt;
  return CrosswordCandidate{*slot, answer, conf};
}

} // namespace detail

inline std::vector<CrosswordCandidate> parse_crossword_candidates(const std::string& text) {
  return scan::collect<CrosswordCandidate>(text, "slot. [hint] ANSWER (confidence)",
                                           detail::try_crossword_candidate_line);
}

inline std::string render_crossword_candidate(const CrosswordCandidate& c,
                                              const std::string& hint = "hint: _____") {
  return c.slot + ". [" + hint + "] " + c.answer + " (" + to_string(c.confidence) + ")";
}

// ============================================================================
// Improvement verdict: "[still need to improve] ..." / "[No need to improve]"
// ============================================================================

struct ImprovementVerdict {
  bool improvement_needed = true;
  std::string reason;

  bool operator==(const ImprovementVerdict&) const = default;
};

namespace detail {

inline std::optional<ImprovementVerdict> try_verdict_line(scan::Cursor& cur) {
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  cur.skip_ws();
  bool needed;
  if (cur.accept_keyword("no need to improve")) needed = false;
  else if (cur.accept_keyword("still need to improve")) needed = true;
  else return std::nullopt;
  cur.skip_ws();
  if (!cur.accept(']')) return std::nullopt;
  cur.skip_ws();
  // optional "[reason]" tag before the free text
  std::size_t mark = cur.pos;
  if (cur.accept('[')) {
    cur.skip_ws();
    if (cur.accept_keyword("reason") && (cur.skip_ws(), cur.accept(']'))) cur.skip_ws();
    else cur.pos = mark;
  }
  return ImprovementVerdict{needed, scan::trim(cur.rest())};
}

} // namespace detail

inline ImprovementVerdict parse_improvement_verdict(const std::string& text) {
  return scan::collect<ImprovementVerdict>(text, "[no/still need to improve]",
                                           detail::try_verdict_line)
      .front();
}

inline std::string render_improvement_verdict(const ImprovementVerdict& v) {
  std::string out = v.improvement_needed ? "[still need to improve]" : "[No need to improve]";
  if (!v.reason.empty()) out += " " + v.reason;
  return out;
}

// ============================================================================
// Numbered list: "[1] first item\n[2] second item"
// ============================================================================

namespace detail {

struct NumberedItem {
  int index;
  std::string text;
};

inline std::optional<NumberedItem> try_numbered_line(scan::Cursor& cur) {
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  auto index = cur.accept_int();
  if (!index || *index <= 0 || !cur.accept(']')) return std::nullopt;
  cur.skip_ws();
  std::string text = scan::trim(cur.rest());
  if (text.empty()) return std::nullopt;
  return NumberedItem{static_cast<int>(*index), std::move(text)};
}

} // namespace detail

inline std::vector<std::string> parse_numbered_list(const std::string& text) {
  auto items = scan::collect<detail::NumberedItem>(text, "[n] item",
                                                   detail::try_numbered_line);
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& item : items) out.push_back(std::move(item.text));
  return out;
}

inline std::string render_numbered_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += '\n';
    out += "[" + std::to_string(i + 1) + "] " + items[i];
  }
  return out;
}

// ============================================================================
// Per-clue evaluation notes: "v2. [reasoning and potential answers]"
// ============================================================================

struct ClueNote {
  std::string slot;
  std::string note;

  bool operator==(const ClueNote&) const = default;
};

namespace detail {

inline std::optional<ClueNote> try_clue_note_line(scan::Cursor& cur) {
  auto slot = try_slot(cur);
  if (!slot || !cur.accept('.')) return std::nullopt;
  cur.skip_ws();
  if (!cur.accept('[')) return std::nullopt;
  // note runs to the last ']' on the line so nested brackets survive
  std::string_view remainder = cur.text.substr(cur.pos);
  auto close = remainder.rfind(']');
  if (close == std::string_view::npos) return std::nullopt;
  std::string note(remainder.substr(0, close));
  cur.pos += close + 1;
  return ClueNote{*slot, scan::trim(std::move(note))};
}

} // namespace detail

inline std::vector<ClueNote> parse_clue_notes(const std::string& text) {
  return scan::collect<ClueNote>(text, "slot. [note]", detail::try_clue_note_line);
}

inline std::string render_clue_note(const ClueNote& n) {
  return n.slot + ". [" + n.note + "]";
}

// ============================================================================
// Fenced code block + arithmetic-check JSON verdict
// ============================================================================

// Returns the body of the first ``` block (optionally language-tagged). Falls
// back to the whole text when no fence is present.
inline std::string extract_code_block(const std::string& text, const std::string& lang = "") {
  const std::string fence = "```";
  auto open = text.find(fence + lang);
  std::size_t body_start;
  if (open != std::string::npos) {
    body_start = open + fence.size() + lang.size();
  } else {
    open = text.find(fence);
    if (open == std::string::npos) return scan::trim(text);
    body_start = open + fence.size();
    // skip a language tag on the fence line
    while (body_start < text.size() && text[body_start] != '\n') ++body_start;
  }
  if (body_start < text.size() && text[body_start] == '\n') ++body_start;
  auto close = text.find(fence, body_start);
  if (close == std::string::npos) return scan::trim(text.substr(body_start));
  return scan::trim(text.substr(body_start, close - body_start));
}

struct ArithmeticVerdict {
  std::string calculation;
  long result = 0;
  std::string feedback;
  bool correct = false;

  bool operator==(const ArithmeticVerdict&) const = default;
};

inline ArithmeticVerdict parse_arithmetic_verdict(const std::string& text) {
  std::string body = extract_code_block(text, "json");
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("correct"))
    throw ParseError("no JSON verdict with a \"correct\" field", 0);
  ArithmeticVerdict v;
  v.calculation = doc.value("calculation", "");
  if (doc.contains("result") && doc["result"].is_number())
    v.result = doc["result"].get<long>();
  v.feedback = doc.value("feedback", "");
  if (!doc["correct"].is_boolean())
    throw ParseError("\"correct\" is not a boolean", 0);
  v.correct = doc["correct"].get<bool>();
  return v;
}

inline std::string render_arithmetic_verdict(const ArithmeticVerdict& v) {
  nlohmann::json doc = {{"calculation", v.calculation},
                        {"result", v.result},
                        {"feedback", v.feedback},
                        {"correct", v.correct}};
  return "```json\n" + doc.dump(4) + "\n```";
}

// ============================================================================
// parse_scored_line: one entry point over the four bracket grammars
// ============================================================================

enum class PatternKind {
  holistic_score,
  itemized_finding,
  crossword_candidate,
  commongen_verdict,
};

using ScoredLine =
    std::variant<HolisticScore, ItemizedFinding, CrosswordCandidate, ImprovementVerdict>;

inline ScoredLine parse_scored_line(const std::string& text, PatternKind kind) {
  switch (kind) {
    case PatternKind::holistic_score: return parse_holistic_score(text);
    case PatternKind::itemized_finding: return parse_itemized_findings(text).front();
    case PatternKind::crossword_candidate: return parse_crossword_candidates(text).front();
    case PatternKind::commongen_verdict: return parse_improvement_verdict(text);
  }
  throw MuseError(ErrorKind::config, "unknown pattern kind");
}

} // namespace muse
