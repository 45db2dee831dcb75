#include "masched/dtree.hpp"

#include "masched/error.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>

namespace masched {

DecisionTree::DecisionTree(std::vector<std::string> variables, std::vector<std::string> actions, std::vector<Node> nodes)
    : variables_(std::move(variables)), actions_(std::move(actions)), nodes_(std::move(nodes)) {}

ActionId DecisionTree::classify(std::span<const Value> obs) const {
  std::uint32_t i = 0;
  while (!nodes_[i].leaf()) {
    const auto& n = nodes_[i];
    i = obs[static_cast<std::size_t>(n.variable)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].action;
}

std::size_t DecisionTree::leaves() const noexcept {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf(); }));
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes_[i].leaf()) d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
  }
  return best;
}

std::set<std::string> DecisionTree::variables_used() const {
  std::set<std::string> out;
  for (const auto& n : nodes_)
    if (!n.leaf()) out.insert(variables_.at(static_cast<std::size_t>(n.variable)));
  return out;
}

std::set<std::string> DecisionTree::leaf_actions() const {
  std::set<std::string> out;
  for (const auto& n : nodes_)
    if (n.leaf()) out.insert(actions_.at(n.action));
  return out;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string DecisionTree::to_dot() const {
  std::ostringstream o;
  o << "digraph strategy {\n  node [fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.leaf()) {
      o << "  n" << i << " [shape=box, label=\"" << dot_escape(actions_.at(n.action)) << "\"];\n";
    } else {
      o << "  n" << i << " [shape=ellipse, label=\"" << dot_escape(variables_.at(static_cast<std::size_t>(n.variable)))
        << " \xE2\x89\xA4 " << n.threshold << "\"];\n";
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.leaf()) continue;
    o << "  n" << i << " -> n" << n.left << " [label=\"true\"];\n";
    o << "  n" << i << " -> n" << n.right << " [label=\"false\"];\n";
  }
  o << "}\n";
  return o.str();
}

std::string DecisionTree::serialize() const {
  std::ostringstream o;
  o << "# masched decision tree v1\nvars:";
  for (const auto& v : variables_) o << ' ' << v;
  o << "\nactions:";
  for (const auto& a : actions_) o << ' ' << a;
  o << '\n';
  for (const auto& n : nodes_) {
    if (n.leaf()) o << "L " << actions_.at(n.action) << '\n';
    else o << "S " << n.variable << ' ' << n.threshold << '\n';
  }
  return o.str();
}

DecisionTree DecisionTree::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto words = [](const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> w;
    for (std::string x; ss >> x;) w.push_back(x);
    return w;
  };
  if (!std::getline(in, line) || line != "# masched decision tree v1") throw ModelError("decision tree: bad header");
  if (!std::getline(in, line) || line.rfind("vars:", 0) != 0) throw ModelError("decision tree: missing vars line");
  auto vars = words(line.substr(5));
  if (!std::getline(in, line) || line.rfind("actions:", 0) != 0) throw ModelError("decision tree: missing actions line");
  auto actions = words(line.substr(8));

  struct Raw {
    bool leaf;
    int var;
    Value threshold;
    ActionId action;
  };
  std::vector<Raw> raw;
  while (std::getline(in, line)) {
    auto w = words(line);
    if (w.empty()) continue;
    if (w[0] == "L" && w.size() == 2) {
      auto it = std::find(actions.begin(), actions.end(), w[1]);
      if (it == actions.end()) throw ModelError("decision tree: unknown action " + w[1]);
      raw.push_back({true, -1, 0, static_cast<ActionId>(it - actions.begin())});
    } else if (w[0] == "S" && w.size() == 3) {
      const int var = std::stoi(w[1]);
      if (var < 0 || static_cast<std::size_t>(var) >= vars.size()) throw ModelError("decision tree: bad variable index");
      raw.push_back({false, var, static_cast<Value>(std::stol(w[2])), 0});
    } else {
      throw ModelError("decision tree: malformed node line '" + line + "'");
    }
  }
  // Rebuild child links from the preorder sequence.
  std::vector<Node> nodes(raw.size());
  std::vector<std::uint32_t> open;  // inner nodes still missing their right child
  std::vector<char> has_left(raw.size(), 0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    nodes[i].variable = raw[i].var;
    nodes[i].threshold = raw[i].threshold;
    nodes[i].action = raw[i].action;
    if (i > 0) {
      if (open.empty()) throw ModelError("decision tree: trailing nodes");
      const std::uint32_t parent = open.back();
      if (!has_left[parent]) {
        nodes[parent].left = static_cast<std::uint32_t>(i);
        has_left[parent] = 1;
      } else {
        nodes[parent].right = static_cast<std::uint32_t>(i);
        open.pop_back();
      }
    }
    if (!raw[i].leaf) open.push_back(static_cast<std::uint32_t>(i));
  }
  if (!open.empty() || raw.empty()) throw ModelError("decision tree: incomplete tree");
  return DecisionTree(vars, actions, std::move(nodes));
}

namespace {

double entropy(const std::vector<std::uint32_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (std::uint32_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

DecisionTree learn_tree(const StrategyTable& table) {
  if (table.empty()) throw StrategyError("empty strategy");
  const auto& rows = table.rows();
  const std::size_t arity = table.variables().size();
  const std::size_t n_actions = table.actions().size();
  constexpr double kTol = 1e-12;

  std::vector<DecisionTree::Node> nodes;
  struct Task {
    std::vector<std::uint32_t> rows;
    std::int64_t parent;
    bool left;
  };
  std::vector<Task> stack;
  std::vector<std::uint32_t> all(rows.size());
  std::iota(all.begin(), all.end(), 0u);
  stack.push_back({std::move(all), -1, true});

  std::vector<std::uint32_t> left_counts(n_actions), right_counts(n_actions), total_counts(n_actions);
  while (!stack.empty()) {
    Task task = std::move(stack.back());
    stack.pop_back();
    const auto id = static_cast<std::uint32_t>(nodes.size());
    nodes.emplace_back();
    if (task.parent >= 0) (task.left ? nodes[task.parent].left : nodes[task.parent].right) = id;

    const ActionId first = rows[task.rows[0]].second;
    const bool pure = std::all_of(task.rows.begin(), task.rows.end(), [&](std::uint32_t r) { return rows[r].second == first; });
    if (pure) {
      nodes[id].action = first;
      continue;
    }

    std::fill(total_counts.begin(), total_counts.end(), 0u);
    for (std::uint32_t r : task.rows) ++total_counts[rows[r].second];

    double best_score = 0.0;
    int best_var = -1;
    Value best_threshold = 0;
    std::vector<std::uint32_t> sorted = task.rows;
    const std::size_t n = sorted.size();
    for (std::size_t v = 0; v < arity; ++v) {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return rows[a].first.values[v] < rows[b].first.values[v]; });
      std::fill(left_counts.begin(), left_counts.end(), 0u);
      right_counts = total_counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const ActionId a = rows[sorted[i]].second;
        ++left_counts[a];
        --right_counts[a];
        const Value here = rows[sorted[i]].first.values[v];
        const Value next = rows[sorted[i + 1]].first.values[v];
        if (here == next) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        const double score = (static_cast<double>(nl) * entropy(left_counts, nl) +
                              static_cast<double>(nr) * entropy(right_counts, nr)) /
                             static_cast<double>(n);
        if (best_var < 0 || score < best_score - kTol) {
          best_score = score;
          best_var = static_cast<int>(v);
          best_threshold = here;
        }
      }
    }
    assert(best_var >= 0 && "impure node without a split: duplicate observations");
    if (best_var < 0) throw ConsistencyError("strategy table has an impure node that cannot be split");

    nodes[id].variable = best_var;
    nodes[id].threshold = best_threshold;
    Task lt{{}, id, true}, rt{{}, id, false};
    for (std::uint32_t r : task.rows)
      (rows[r].first.values[static_cast<std::size_t>(best_var)] <= best_threshold ? lt.rows : rt.rows).push_back(r);
    stack.push_back(std::move(rt));
    stack.push_back(std::move(lt));
  }
  return DecisionTree(table.variables(), table.actions(), std::move(nodes));
}

}  // namespace masched
