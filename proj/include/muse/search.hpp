#pragma once

/**
 * Deliberation loops over a thought tree.
 *
 * Both searches drive two abstract callbacks: an evaluator that scores a node
 * and produces revision feedback, and a generator that turns (node, feedback)
 * into candidate replacement solutions. MCTS follows the classic
 * select / expand / simulate / backpropagate cycle with UCB1 selection;
 * DFS greedily descends into the best-scoring child per level.
 *
 * Reward bookkeeping: every fresh evaluation backpropagates its normalized
 * score from the evaluated node, so an evaluated node always has at least one
 * visit and its running average starts at its own score. The final answer is
 * the evaluated node with the highest average reward, ties going to the
 * earliest-created node.
 */

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "muse/error.hpp"
#include "muse/tree.hpp"

namespace muse {

// Scores a node and returns its feedback (numeric + natural language).
using Evaluator = std::function<Feedback(const ThoughtNode&)>;

// Produces up to k candidate replacement solutions for a node given its
// feedback. May return fewer when candidates fail to parse; throws MuseError
// when nothing could be produced.
using Generator =
    std::function<std::vector<std::string>(const ThoughtNode&, const Feedback&, int)>;

// Hook for trace recording. Default implementation ignores everything.
class SearchObserver {
 public:
  virtual ~SearchObserver() = default;
  virtual void on_rollout_start(int /*rollout*/) {}
  virtual void on_selection(NodeId /*node*/) {}
  virtual void on_node_created(const ThoughtNode& /*node*/) {}
  virtual void on_expansion(NodeId /*parent*/, const std::vector<NodeId>& /*children*/) {}
  virtual void on_simulation(NodeId /*parent*/, NodeId /*child*/) {}
  // node_only records a score at the node itself without touching ancestors
  // (used by DFS and the linear baselines).
  virtual void on_backprop(NodeId /*from*/, double /*reward*/, bool /*node_only*/) {}
  virtual void on_rollout_failed(int /*rollout*/, std::string_view /*reason*/) {}
  virtual void on_warning(std::string_view /*message*/) {}
};

inline SearchObserver& null_observer() {
  static SearchObserver instance;
  return instance;
}

// ============================================================================
// Primitive operations
// ============================================================================

// UCB1 priority: value_avg + c * sqrt(ln(parent_visits) / visits).
// Unvisited nodes get infinite priority so they are selected before any
// visited sibling.
inline double ucb1(double value_avg, int visits, int parent_visits, double c) {
  MUSE_EXPECTS(visits >= 0);
  MUSE_EXPECTS(parent_visits >= 1 && parent_visits >= visits);
  MUSE_EXPECTS(c >= 0.0);
  if (visits == 0) return std::numeric_limits<double>::infinity();
  return value_avg + c * std::sqrt(std::log(static_cast<double>(parent_visits)) /
                                   static_cast<double>(visits));
}

// Root-to-leaf descent by per-level UCB1 argmax, ties broken by lowest child
// index. Stops at a node with no children or at max_depth.
inline NodeId select_leaf(const ThoughtTree& tree, const SearchBudget& budget) {
  NodeId cur = tree.root();
  while (true) {
    const ThoughtNode& n = tree.node(cur);
    if (n.children.empty() || n.depth >= budget.max_depth) return cur;
    NodeId best = n.children.front();
    double best_priority = -std::numeric_limits<double>::infinity();
    for (NodeId child_id : n.children) {
      const ThoughtNode& child = tree.node(child_id);
      double priority =
          ucb1(child.reward_avg(), child.visits, n.visits, budget.exploration_c);
      if (priority > best_priority) {
        best_priority = priority;
        best = child_id;
      }
    }
    cur = best;
  }
}

// Adds (1 visit, reward) to every node on the path from from_node to the
// root, inclusive.
inline void backpropagate(ThoughtTree& tree, NodeId from_node, double reward) {
  MUSE_EXPECTS(reward >= 0.0 && reward <= 1.0);
  for (NodeId id : tree.path_to_root(from_node)) {
    ThoughtNode& n = tree.node(id);
    n.visits += 1;
    n.reward_sum += reward;
  }
}

// ============================================================================
// Search result selection
// ============================================================================

namespace detail {

// Highest average reward over all evaluated nodes, ties by creation order.
inline NodeId best_evaluated_node(const ThoughtTree& tree) {
  NodeId best = kNoNode;
  double best_avg = -1.0;
  for (const ThoughtNode& n : tree.nodes()) {
    if (!n.evaluated() || n.visits == 0) continue;
    double avg = n.reward_avg();
    if (avg > best_avg) {
      best_avg = avg;
      best = n.id;
    }
  }
  return best;
}

inline SearchOutcome make_outcome(const ThoughtTree& tree, NodeId best, int steps_used) {
  SearchOutcome out;
  out.best_node = best;
  out.best_reward_avg = tree.node(best).reward_avg();
  out.nodes_expanded = static_cast<int>(tree.size());
  out.steps_used = steps_used;
  return out;
}

} // namespace detail

// ============================================================================
// MCTS (rollout-based deliberation)
// ============================================================================

struct MctsResult {
  SearchOutcome outcome;
  ThoughtTree tree;
};

inline MctsResult mcts_search_tree(std::string root_content, const SearchBudget& budget,
                                   const Evaluator& evaluator, const Generator& generator,
                                   unsigned long long rng_seed,
                                   SearchObserver& observer = null_observer()) {
  budget.validate();
  MUSE_EXPECTS(evaluator != nullptr && generator != nullptr);

  ThoughtTree tree(std::move(root_content));
  std::mt19937_64 rng(rng_seed);
  int steps_used = 0;
  int failed_rollouts = 0;
  int attempted_rollouts = 0;

  auto steps_left = [&]() {
    return budget.step_cap ? *budget.step_cap - steps_used
                           : std::numeric_limits<int>::max();
  };

  // Evaluate a node that has no feedback yet; fresh scores backpropagate.
  auto ensure_feedback = [&](NodeId id) -> const Feedback& {
    if (!tree.node(id).evaluated()) {
      Feedback fb = evaluator(tree.node(id));
      tree.attach_feedback(id, fb);
      backpropagate(tree, id, fb.numeric_norm);
      observer.on_backprop(id, fb.numeric_norm, false);
    }
    return tree.node(id).latest_feedback();
  };

  for (int rollout = 0; rollout < budget.d_rollout; ++rollout) {
    if (steps_left() <= 0) break;
    ++attempted_rollouts;
    observer.on_rollout_start(rollout);
    try {
      NodeId leaf = select_leaf(tree, budget);
      observer.on_selection(leaf);

      if (tree.node(leaf).depth >= budget.max_depth) {
        // Depth cap: skip expansion, re-evaluate and backpropagate. Consumes
        // this rollout.
        Feedback fb = evaluator(tree.node(leaf));
        tree.attach_feedback(leaf, fb);
        backpropagate(tree, leaf, fb.numeric_norm);
        observer.on_backprop(leaf, fb.numeric_norm, false);
        continue;
      }

      const Feedback leaf_feedback = ensure_feedback(leaf);

      // Expansion: up to k children from the leaf's feedback. Each generated
      // candidate is one step.
      int want = std::min(budget.max_candidates, steps_left());
      std::vector<std::string> contents = generator(tree.node(leaf), leaf_feedback, want);
      if (contents.empty())
        throw MuseError(ErrorKind::generation_failed, "expansion produced no candidates");
      if (static_cast<int>(contents.size()) > want)
        contents.resize(static_cast<std::size_t>(want));

      std::vector<NodeId> children;
      for (auto& content : contents) {
        NodeId child = tree.add_child(leaf, std::move(content), NodeOrigin::expansion,
                                      rollout, leaf_feedback.nl_text);
        observer.on_node_created(tree.node(child));
        children.push_back(child);
        ++steps_used;
      }
      observer.on_expansion(leaf, children);

      // Simulation: uniformly sample one new child, then a single further
      // child per step until d_simulation is reached (or steps run out).
      NodeId current = children[static_cast<std::size_t>(
          rng() % static_cast<unsigned long long>(children.size()))];
      for (int step = 0; step < budget.d_simulation && steps_left() > 0; ++step) {
        const Feedback fb = ensure_feedback(current); // copy: add_child may reallocate
        std::vector<std::string> next = generator(tree.node(current), fb, 1);
        if (next.empty()) break;
        NodeId child = tree.add_child(current, std::move(next.front()),
                                      NodeOrigin::simulation, rollout, fb.nl_text);
        observer.on_node_created(tree.node(child));
        observer.on_simulation(current, child);
        ++steps_used;
        current = child;
      }

      // Reward of the simulation terminus.
      ensure_feedback(current);
    } catch (const MuseError& e) {
      ++failed_rollouts;
      observer.on_rollout_failed(rollout, e.what());
    }
  }

  NodeId best = detail::best_evaluated_node(tree);
  if (best == kNoNode)
    throw MuseError(ErrorKind::no_progress,
                    "all " + std::to_string(failed_rollouts) + "/" +
                        std::to_string(attempted_rollouts) + " rollouts failed");
  return {detail::make_outcome(tree, best, steps_used), std::move(tree)};
}

inline SearchOutcome mcts_search(std::string root_content, const SearchBudget& budget,
                                 const Evaluator& evaluator, const Generator& generator,
                                 unsigned long long rng_seed,
                                 SearchObserver& observer = null_observer()) {
  return mcts_search_tree(std::move(root_content), budget, evaluator, generator,
                          rng_seed, observer)
      .outcome;
}

// ============================================================================
// DFS (greedy level-by-level deliberation)
// ============================================================================

inline MctsResult dfs_search_tree(std::string root_content, int depth,
                                  const SearchBudget& budget, const Evaluator& evaluator,
                                  const Generator& generator,
                                  SearchObserver& observer = null_observer()) {
  MUSE_EXPECTS(depth >= 0);
  budget.validate();

  ThoughtTree tree(std::move(root_content));
  int steps_used = 0;

  auto steps_left = [&]() {
    return budget.step_cap ? *budget.step_cap - steps_used
                           : std::numeric_limits<int>::max();
  };

  // DFS scores live at the node itself; there is no path accumulation.
  auto evaluate_node = [&](NodeId id) -> bool {
    if (tree.node(id).evaluated()) return true;
    try {
      Feedback fb = evaluator(tree.node(id));
      tree.attach_feedback(id, fb);
      ThoughtNode& n = tree.node(id);
      n.visits += 1;
      n.reward_sum += fb.numeric_norm;
      observer.on_backprop(id, fb.numeric_norm, true);
      return true;
    } catch (const MuseError& e) {
      observer.on_warning(std::string("evaluation failed: ") + e.what());
      return false;
    }
  };

  NodeId current = tree.root();
  for (int level = 0; level < depth && steps_left() > 0; ++level) {
    if (!evaluate_node(current)) break;
    const Feedback fb = tree.node(current).latest_feedback();

    int want = std::min(budget.max_candidates, steps_left());
    std::vector<std::string> contents;
    try {
      contents = generator(tree.node(current), fb, want);
    } catch (const MuseError& e) {
      observer.on_rollout_failed(level, e.what());
      break;
    }
    if (contents.empty()) break;
    if (static_cast<int>(contents.size()) > want)
      contents.resize(static_cast<std::size_t>(want));

    std::vector<NodeId> children;
    for (auto& content : contents) {
      NodeId child =
          tree.add_child(current, std::move(content), NodeOrigin::expansion, level, fb.nl_text);
      observer.on_node_created(tree.node(child));
      children.push_back(child);
      ++steps_used;
    }
    observer.on_expansion(current, children);

    // Evaluate every child, then recurse into the single best (ties by
    // lowest index).
    NodeId best_child = kNoNode;
    double best_reward = -1.0;
    for (NodeId child : children) {
      if (!evaluate_node(child)) continue;
      double v = tree.node(child).latest_feedback().numeric_norm;
      if (v > best_reward) {
        best_reward = v;
        best_child = child;
      }
    }
    if (best_child == kNoNode) break;
    current = best_child;
  }

  NodeId best = detail::best_evaluated_node(tree);
  if (best == kNoNode) {
    if (depth == 0) // base case: root returned unmodified, never evaluated
      return {detail::make_outcome(tree, tree.root(), steps_used), std::move(tree)};
    throw MuseError(ErrorKind::no_progress, "dfs made no progress");
  }
  return {detail::make_outcome(tree, best, steps_used), std::move(tree)};
}

inline SearchOutcome dfs_search(std::string root_content, int depth,
                                const SearchBudget& budget, const Evaluator& evaluator,
                                const Generator& generator,
                                SearchObserver& observer = null_observer()) {
  return dfs_search_tree(std::move(root_content), depth, budget, evaluator, generator,
                         observer)
      .outcome;
}

} // namespace muse
