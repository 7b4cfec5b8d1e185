#pragma once

#include <optional>
#include <string>
#include <vector>

namespace muse {

enum class EvalMode { holistic, itemized };

inline const char* to_string(EvalMode mode) {
  return mode == EvalMode::holistic ? "holistic" : "itemized";
}

// One finding of an itemized evaluation: a contiguous range of sub-units with
// a reason and a level on the task's native scale.
struct ItemizedFinding {
  std::string reason;
  int start_index = 1;
  int end_index = 1;
  int level = 0;

  bool operator==(const ItemizedFinding&) const = default;
};

// Paired natural-language and numeric evaluation of a node. numeric_raw is on
// the task's native scale; numeric_norm is the [0,1] reward fed to search.
struct Feedback {
  std::string nl_text;
  double numeric_raw = 0.0;
  double numeric_norm = 0.0;
  EvalMode kind = EvalMode::holistic;
  std::vector<ItemizedFinding> items;
  std::optional<bool> improvement_needed; // set by tasks whose grammar has a stop verdict
};

struct CandidateSet {
  int parent = -1; // node identifier, filled by callers that know the tree
  std::vector<std::string> candidates;
  int requested_k = 1;
};

} // namespace muse
