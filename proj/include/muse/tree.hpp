#pragma once

#include <optional>
#include <string>
#include <vector>

#include "muse/error.hpp"
#include "muse/feedback.hpp"

namespace muse {

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

enum class NodeOrigin { root, expansion, simulation };

inline const char* to_string(NodeOrigin origin) {
  switch (origin) {
    case NodeOrigin::root: return "root";
    case NodeOrigin::expansion: return "expansion";
    case NodeOrigin::simulation: return "simulation";
  }
  return "root";
}

// One candidate solution in the search tree. reward_sum/visits accumulate via
// backpropagation; feedback holds every evaluation of this node in order.
struct ThoughtNode {
  NodeId id = 0;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  std::string content;
  int depth = 0;
  std::vector<Feedback> feedback;
  double reward_sum = 0.0;
  int visits = 0;
  NodeOrigin origin = NodeOrigin::root;
  int created_step = 0;          // rollout (or chain) index at creation
  std::string seed_feedback;     // f_NL text the generator saw when creating this node

  bool evaluated() const { return !feedback.empty(); }
  const Feedback& latest_feedback() const {
    MUSE_EXPECTS(!feedback.empty());
    return feedback.back();
  }
  double reward_avg() const { return visits > 0 ? reward_sum / visits : 0.0; }
};

class ThoughtTree {
 public:
  explicit ThoughtTree(std::string root_content) {
    ThoughtNode root;
    root.id = 0;
    root.content = std::move(root_content);
    nodes_.push_back(std::move(root));
  }

  NodeId root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }

  const ThoughtNode& node(NodeId id) const {
    check(id);
    return nodes_[static_cast<std::size_t>(id)];
  }
  ThoughtNode& node(NodeId id) {
    check(id);
    return nodes_[static_cast<std::size_t>(id)];
  }

  const std::vector<ThoughtNode>& nodes() const { return nodes_; }

  NodeId add_child(NodeId parent, std::string content, NodeOrigin origin,
                   int created_step, std::string seed_feedback = "") {
    check(parent);
    ThoughtNode child;
    child.id = static_cast<NodeId>(nodes_.size());
    child.parent = parent;
    child.depth = nodes_[static_cast<std::size_t>(parent)].depth + 1;
    child.content = std::move(content);
    child.origin = origin;
    child.created_step = created_step;
    child.seed_feedback = std::move(seed_feedback);
    nodes_[static_cast<std::size_t>(parent)].children.push_back(child.id);
    nodes_.push_back(std::move(child));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  void attach_feedback(NodeId id, Feedback fb) { node(id).feedback.push_back(std::move(fb)); }

  // Path from a node up to the root, inclusive.
  std::vector<NodeId> path_to_root(NodeId from) const {
    check(from);
    std::vector<NodeId> path;
    std::optional<NodeId> cur = from;
    while (cur) {
      path.push_back(*cur);
      cur = nodes_[static_cast<std::size_t>(*cur)].parent;
    }
    return path;
  }

  bool contains(NodeId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < nodes_.size();
  }

 private:
  void check(NodeId id) const {
    if (!contains(id))
      throw MuseError(ErrorKind::invalid_node, "no node with id " + std::to_string(id));
  }

  std::vector<ThoughtNode> nodes_;
};

// All search knobs in one place.
struct SearchBudget {
  int d_rollout = 8;            // MCTS iterations
  int d_simulation = 1;         // simulation depth per rollout; 0 evaluates the expansion child directly
  int max_candidates = 3;       // k
  double exploration_c = 1.0;   // UCB1 constant; rewards are normalized to [0,1]
  int max_depth = 3;
  std::optional<int> step_cap;  // global cap on generator actions (crosswords)

  void validate() const {
    if (d_rollout <= 0) throw MuseError(ErrorKind::config, "d_rollout must be > 0");
    if (d_simulation < 0) throw MuseError(ErrorKind::config, "d_simulation must be >= 0");
    if (max_candidates <= 0) throw MuseError(ErrorKind::config, "max_candidates must be > 0");
    if (exploration_c < 0.0) throw MuseError(ErrorKind::config, "exploration_c must be >= 0");
    if (max_depth <= 0) throw MuseError(ErrorKind::config, "max_depth must be > 0");
    if (step_cap && *step_cap <= 0) throw MuseError(ErrorKind::config, "step_cap must be > 0");
  }
};

struct SearchOutcome {
  NodeId best_node = 0;
  double best_reward_avg = 0.0;
  int nodes_expanded = 0;
  int steps_used = 0;
  std::string trace_path; // filled by the harness once the trace is persisted
};

} // namespace muse
