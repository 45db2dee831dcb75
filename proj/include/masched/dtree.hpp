#pragma once

#include "masched/strategy_table.hpp"
#include "masched/types.hpp"

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace masched {

// Axis-aligned decision tree: inner nodes test `variable <= threshold` (true goes
// left), leaves carry an action. Nodes are stored in preorder; the root is node 0.
class DecisionTree {
 public:
  struct Node {
    int variable = -1;  // -1: leaf
    Value threshold = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    ActionId action = 0;
    bool leaf() const noexcept { return variable < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  DecisionTree() = default;
  DecisionTree(std::vector<std::string> variables, std::vector<std::string> actions, std::vector<Node> nodes);

  ActionId classify(std::span<const Value> obs) const;
  const std::string& classify_name(std::span<const Value> obs) const { return actions_.at(classify(obs)); }

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t leaves() const noexcept;
  std::size_t depth() const;
  std::set<std::string> variables_used() const;
  std::set<std::string> leaf_actions() const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<std::string>& actions() const noexcept { return actions_; }

  std::string to_dot() const;
  std::string serialize() const;
  static DecisionTree deserialize(const std::string& text);

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<std::string> variables_;
  std::vector<std::string> actions_;
  std::vector<Node> nodes_;
};

// Top-down induction without pruning: each node takes the split with the lowest
// weighted entropy of the action labels (ties: lowest variable, then lowest threshold)
// until every leaf is pure. Throws StrategyError("empty strategy") on an empty table.
DecisionTree learn_tree(const StrategyTable& table);

}  // namespace masched
