#include "masched/strategy_table.hpp"

#include "masched/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace masched {

namespace {

constexpr const char* kMagic = "# masched strategy table v1";

bool less_obs(std::span<const Value> a, std::span<const Value> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::vector<std::string> header_list(std::istream& in, const std::string& key, int& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw ModelError("strategy table: missing '" + key + ":' line");
  ++line_no;
  if (line.rfind(key + ":", 0) != 0)
    throw ModelError("strategy table line " + std::to_string(line_no) + ": expected '" + key + ":'");
  return split_words(line.substr(key.size() + 1));
}

}  // namespace

std::string format_observation(std::span<const Value> obs) {
  std::string s = "(";
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(obs[i]);
  }
  return s + ")";
}

StrategyTable::StrategyTable(std::vector<std::string> variables, std::vector<std::string> actions)
    : variables_(std::move(variables)), actions_(std::move(actions)) {}

void StrategyTable::insert(Observation obs, ActionId action) {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), obs, [](const Row& r, const Observation& o) { return r.first < o; });
  if (it != rows_.end() && it->first == obs) {
    if (it->second != action)
      throw ConsistencyError("observation " + format_observation(obs.values) + " maps to both '" + actions_.at(it->second) +
                             "' and '" + actions_.at(action) + "'");
    return;
  }
  rows_.insert(it, Row{std::move(obs), action});
}

void StrategyTable::append_sorted(Observation obs, ActionId action) {
  if (!rows_.empty() && !(rows_.back().first < obs)) {
    insert(std::move(obs), action);
    return;
  }
  rows_.emplace_back(std::move(obs), action);
}

const ActionId* StrategyTable::find(std::span<const Value> obs) const {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), obs,
                             [](const Row& r, std::span<const Value> o) { return less_obs(r.first.values, o); });
  if (it == rows_.end() || !std::equal(it->first.values.begin(), it->first.values.end(), obs.begin(), obs.end()))
    return nullptr;
  return &it->second;
}

void StrategyTable::write(std::ostream& out) const {
  out << kMagic << "\nvars:";
  for (const auto& v : variables_) out << ' ' << v;
  out << "\nactions:";
  for (const auto& a : actions_) out << ' ' << a;
  out << '\n';
  for (const auto& [obs, action] : rows_) {
    for (Value v : obs.values) out << v << ' ';
    out << actions_.at(action) << '\n';
  }
}

StrategyTable StrategyTable::read(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || line != kMagic) throw ModelError("strategy table: bad header line");
  auto vars = header_list(in, "vars", line_no);
  auto actions = header_list(in, "actions", line_no);
  StrategyTable table(vars, actions);
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = "strategy table line " + std::to_string(line_no) + ": ";
    auto words = split_words(line);
    if (words.empty()) continue;
    if (words.size() != vars.size() + 1) throw ModelError(where + "expected " + std::to_string(vars.size() + 1) + " fields");
    Observation obs;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      Value v = 0;
      const auto& w = words[i];
      auto [end, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
      if (ec != std::errc() || end != w.data() + w.size()) throw ModelError(where + "malformed value '" + w + "'");
      obs.values.push_back(v);
    }
    auto a = std::find(actions.begin(), actions.end(), words.back());
    if (a == actions.end()) throw ModelError(where + "unknown action '" + words.back() + "'");
    if (table.find(obs.values)) throw ModelError(where + "duplicate observation " + format_observation(obs.values));
    table.append_sorted(std::move(obs), static_cast<ActionId>(a - actions.begin()));
  }
  return table;
}

void StrategyTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write(out);
  if (!out) throw IoError("write failed: " + path);
}

StrategyTable StrategyTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return read(in);
}

}  // namespace masched
