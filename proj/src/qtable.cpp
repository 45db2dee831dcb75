#include "masched/qtable.hpp"

#include "masched/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace masched {

namespace {

constexpr const char* kMagic = "# masched q-table v1";

Observation& lookup_key(std::span<const Value> obs) {
  thread_local Observation key;
  key.values.assign(obs.begin(), obs.end());
  return key;
}

std::string full_precision(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

QTable::QTable(std::vector<std::string> variables, std::vector<std::string> actions, Meta meta)
    : variables_(std::move(variables)), actions_(std::move(actions)), meta_(std::move(meta)) {}

const std::vector<QTable::Entry>* QTable::row(std::span<const Value> obs) const {
  auto it = index_.find(lookup_key(obs));
  return it == index_.end() ? nullptr : &data_[it->second];
}

std::vector<QTable::Entry>* QTable::row_mut(std::span<const Value> obs) {
  auto& key = lookup_key(obs);
  auto it = index_.find(key);
  if (it != index_.end()) return &data_[it->second];
  index_.emplace(key, static_cast<std::uint32_t>(data_.size()));
  data_.emplace_back();
  return &data_.back();
}

double QTable::get(std::span<const Value> obs, ActionId action) const {
  if (const auto* r = row(obs))
    for (const auto& e : *r)
      if (e.action == action) return e.value;
  return 0.0;
}

double& QTable::at(std::span<const Value> obs, ActionId action) {
  auto* r = row_mut(obs);
  for (auto& e : *r)
    if (e.action == action) return e.value;
  r->push_back(Entry{action, 0.0});
  ++entries_;
  return r->back().value;
}

void QTable::set(std::span<const Value> obs, ActionId action, double value) { at(obs, action) = value; }

std::size_t QTable::estimated_bytes() const noexcept {
  const std::size_t per_row = 96 + variables_.size() * sizeof(Value);
  return index_.size() * per_row + entries_ * sizeof(Entry);
}

std::vector<std::pair<Observation, std::vector<QTable::Entry>>> QTable::sorted_rows() const {
  std::vector<std::pair<Observation, std::vector<Entry>>> out;
  out.reserve(index_.size());
  for (const auto& [obs, i] : index_) out.emplace_back(obs, data_[i]);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

StrategyTable QTable::to_strategy() const {
  StrategyTable table(variables_, actions_);
  for (auto& [obs, entries] : sorted_rows()) {
    if (entries.empty()) continue;
    const Entry* best = &entries[0];
    for (const auto& e : entries)
      if (better(meta_.direction, e.value, best->value)) best = &e;
    table.append_sorted(obs, best->action);
  }
  return table;
}

void QTable::write(std::ostream& out) const {
  out << kMagic << '\n'
      << "key: " << meta_.key_mode << '\n'
      << "direction: " << to_string(meta_.direction) << '\n'
      << "episodes: " << meta_.episodes << '\n'
      << "alpha: " << meta_.alpha << '\n'
      << "epsilon: " << meta_.epsilon << '\n'
      << "gamma: " << full_precision(meta_.gamma) << '\n'
      << "vars:";
  for (const auto& v : variables_) out << ' ' << v;
  out << "\nactions:";
  for (const auto& a : actions_) out << ' ' << a;
  out << '\n';
  for (const auto& [obs, entries] : sorted_rows()) {
    for (const auto& e : entries) {
      for (Value v : obs.values) out << v << ' ';
      out << actions_.at(e.action) << ' ' << full_precision(e.value) << '\n';
    }
  }
}

QTable QTable::read(std::istream& in, const std::string& expect_key_mode) {
  std::string line;
  int line_no = 0;
  auto next = [&](const std::string& key) {
    if (!std::getline(in, line)) throw ModelError("q-table: missing '" + key + ":' line");
    ++line_no;
    if (line.rfind(key + ":", 0) != 0) throw ModelError("q-table line " + std::to_string(line_no) + ": expected '" + key + ":'");
    auto v = line.substr(key.size() + 1);
    v.erase(0, v.find_first_not_of(' '));
    return v;
  };
  auto words = [](const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> w;
    for (std::string x; ss >> x;) w.push_back(x);
    return w;
  };
  if (!std::getline(in, line) || line != kMagic) throw ModelError("q-table: bad header line");
  ++line_no;
  Meta meta;
  meta.key_mode = next("key");
  if (!expect_key_mode.empty() && meta.key_mode != expect_key_mode)
    throw ModelError("q-table was learned with key mode " + meta.key_mode + ", cannot be used in " + expect_key_mode + " mode");
  meta.direction = parse_direction(next("direction"));
  meta.episodes = std::stoull(next("episodes"));
  meta.alpha = next("alpha");
  meta.epsilon = next("epsilon");
  meta.gamma = std::stod(next("gamma"));
  auto vars = words(next("vars"));
  auto actions = words(next("actions"));
  QTable q(vars, actions, meta);
  std::vector<Value> obs(vars.size());
  while (std::getline(in, line)) {
    ++line_no;
    auto w = words(line);
    if (w.empty()) continue;
    const auto where = "q-table line " + std::to_string(line_no) + ": ";
    if (w.size() != vars.size() + 2) throw ModelError(where + "wrong field count");
    for (std::size_t i = 0; i < vars.size(); ++i) {
      auto [end, ec] = std::from_chars(w[i].data(), w[i].data() + w[i].size(), obs[i]);
      if (ec != std::errc() || end != w[i].data() + w[i].size()) throw ModelError(where + "malformed value '" + w[i] + "'");
    }
    auto a = std::find(actions.begin(), actions.end(), w[vars.size()]);
    if (a == actions.end()) throw ModelError(where + "unknown action '" + w[vars.size()] + "'");
    double value = 0.0;
    try {
      value = std::stod(w.back());
    } catch (const std::exception&) {
      throw ModelError(where + "malformed value '" + w.back() + "'");
    }
    q.set(obs, static_cast<ActionId>(a - actions.begin()), value);
  }
  return q;
}

void QTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write(out);
}

QTable QTable::load(const std::string& path, const std::string& expect_key_mode) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return read(in, expect_key_mode);
}

std::size_t greedy_choose(const QTable& q, std::span<const Value> obs, std::span<const ActionId> actions, Direction direction) {
  const auto* r = q.row(obs);
  if (!r) return 0;
  auto value_of = [&](ActionId a) {
    for (const auto& e : *r)
      if (e.action == a) return e.value;
    return 0.0;
  };
  std::size_t best = 0;
  double best_value = value_of(actions[0]);
  for (std::size_t i = 1; i < actions.size(); ++i) {
    const double v = value_of(actions[i]);
    if (better(direction, v, best_value)) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

}  // namespace masched
