#include "masched/mine.hpp"

#include "masched/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace masched::mine {

namespace {

constexpr double kShovelTimes[] = {8, 12, 6, 15, 10, 18, 7, 14, 9, 20};
constexpr double kDumpTimes[] = {6, 14, 9, 17, 11, 5, 13, 19, 8, 16};

struct CatalogRow {
  int name, shovels, dumps, ore_shovels, ore_dumps;
  Combinations published;
};

constexpr CatalogRow kCatalog[] = {
    {4, 6, 5, 3, 3, {15, 30, 9}},    {5, 1, 2, 0, 0, {2, 2, 0}},      {9, 3, 2, 1, 1, {3, 6, 1}},
    {10, 6, 5, 3, 3, {15, 30, 9}},   {35, 6, 5, 3, 3, {15, 30, 9}},   {40, 8, 8, 4, 4, {32, 64, 16}},
    {80, 10, 10, 5, 5, {50, 100, 25}},
};

std::string real_literal(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string shv(int i) { return "shv_" + std::to_string(i); }
std::string dmp(int j) { return "dmp_" + std::to_string(j); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_number(const std::string& text, const std::string& key) {
  T v{};
  const std::string t = trim(text);
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty())
    throw ModelError("mine config: bad value '" + t + "' for " + key);
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_number<T>(item, key));
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      char buf[32];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, xs[i]);
      s.append(buf, end);
    } else {
      s += std::to_string(xs[i]);
    }
  }
  return s;
}

}  // namespace

std::string init_to_shovel(int i) { return "ini_to_" + shv(i); }
std::string init_to_dump(int j) { return "ini_to_" + dmp(j); }
std::string shovel_to_dump(int i, int j) { return shv(i) + "_to_" + dmp(j); }
std::string dump_to_shovel(int j, int i) { return dmp(j) + "_to_" + shv(i); }

bool compatible(const MineConfig& c, int shovel, int dump) {
  return (shovel < c.ore_shovels) == (dump < c.ore_dumps);
}

void apply_defaults(MineConfig& c) {
  for (int i = static_cast<int>(c.shovel_time.size()); i < c.shovels; ++i) c.shovel_time.push_back(kShovelTimes[i % 10]);
  for (int j = static_cast<int>(c.dump_time.size()); j < c.dumps; ++j) c.dump_time.push_back(kDumpTimes[j % 10]);
  for (int i = static_cast<int>(c.shovel_max_obs.size()); i < c.shovels; ++i)
    c.shovel_max_obs.push_back(std::max(2, static_cast<int>(std::ceil(c.shovel_time[i] / c.load_time))));
  for (int j = static_cast<int>(c.dump_max_obs.size()); j < c.dumps; ++j)
    c.dump_max_obs.push_back(std::max(2, static_cast<int>(std::ceil(c.dump_time[j] / c.unload_time))));
}

void validate(const MineConfig& c) {
  auto fail = [](const std::string& m) { throw ModelError("mine config: " + m); };
  if (c.trucks < 1) fail("NR_TRUCKS must be at least 1");
  if (c.shovels < 1 || c.dumps < 1) fail("need at least one shovel and one dump");
  if (c.ore_shovels < 0 || c.ore_shovels > c.shovels) fail("ore shovels must lie in 0..N_S");
  if (c.ore_dumps < 0 || c.ore_dumps > c.dumps) fail("ore dumps must lie in 0..N_D");
  if ((c.ore_shovels > 0) != (c.ore_dumps > 0)) fail("ore shovels and ore dumps must both be zero or both positive");
  if (c.ore_shovels < c.shovels && c.ore_dumps == c.dumps) fail("waste shovels need at least one waste dump");
  if (static_cast<int>(c.shovel_time.size()) != c.shovels || static_cast<int>(c.dump_time.size()) != c.dumps)
    fail("one travel time per site is required");
  if (static_cast<int>(c.shovel_max_obs.size()) != c.shovels || static_cast<int>(c.dump_max_obs.size()) != c.dumps)
    fail("one MAX_OBS per site is required");
  for (double t : c.shovel_time)
    if (!(t > 0)) fail("travel times must be positive");
  for (double t : c.dump_time)
    if (!(t > 0)) fail("travel times must be positive");
  for (int m : c.shovel_max_obs)
    if (m < 0) fail("MAX_OBS must be non-negative");
  for (int m : c.dump_max_obs)
    if (m < 0) fail("MAX_OBS must be non-negative");
  if (!(c.load_time > 0) || !(c.unload_time > 0)) fail("LOAD_TIME and UNLOAD_TIME must be positive");
  if (c.truck_load < 0) fail("TRK_LOAD must be non-negative");
  if (!(c.shift >= 0)) fail("SHIFT must be non-negative");
}

std::vector<int> instance_names() {
  std::vector<int> names;
  for (const auto& r : kCatalog) names.push_back(r.name);
  return names;
}

MineConfig instance(int name) {
  for (const auto& r : kCatalog) {
    if (r.name != name) continue;
    MineConfig c;
    c.name = std::to_string(name);
    c.trucks = name;
    c.shovels = r.shovels;
    c.dumps = r.dumps;
    c.ore_shovels = r.ore_shovels;
    c.ore_dumps = r.ore_dumps;
    apply_defaults(c);
    return c;
  }
  throw ModelError("unknown mine instance " + std::to_string(name));
}

MineConfig parse_config(std::istream& in, MineConfig base) {
  std::string line;
  int line_no = 0;
  bool sites_changed = false;
  MineConfig c = std::move(base);
  std::map<std::string, bool> seen;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ModelError("mine config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (seen[key]) throw ModelError("mine config: duplicate key " + key);
    seen[key] = true;
    if (key == "name") c.name = value;
    else if (key == "trucks") c.trucks = parse_number<int>(value, key);
    else if (key == "shovels") c.shovels = parse_number<int>(value, key), sites_changed = true;
    else if (key == "dumps") c.dumps = parse_number<int>(value, key), sites_changed = true;
    else if (key == "ore_shovels") c.ore_shovels = parse_number<int>(value, key);
    else if (key == "ore_dumps") c.ore_dumps = parse_number<int>(value, key);
    else if (key == "load_time") c.load_time = parse_number<double>(value, key);
    else if (key == "unload_time") c.unload_time = parse_number<double>(value, key);
    else if (key == "truck_load") c.truck_load = parse_number<int>(value, key);
    else if (key == "shift") c.shift = parse_number<double>(value, key);
    else if (key == "shovel_time") c.shovel_time = parse_list<double>(value, key);
    else if (key == "dump_time") c.dump_time = parse_list<double>(value, key);
    else if (key == "shovel_max_obs") c.shovel_max_obs = parse_list<int>(value, key);
    else if (key == "dump_max_obs") c.dump_max_obs = parse_list<int>(value, key);
    else throw ModelError("mine config: unknown key " + key);
  }
  // Derived per-site values are recomputed unless given explicitly.
  if (sites_changed || seen["load_time"] || seen["shovel_time"]) {
    if (!seen["shovel_time"]) c.shovel_time.clear();
    if (!seen["shovel_max_obs"]) c.shovel_max_obs.clear();
  }
  if (sites_changed || seen["unload_time"] || seen["dump_time"]) {
    if (!seen["dump_time"]) c.dump_time.clear();
    if (!seen["dump_max_obs"]) c.dump_max_obs.clear();
  }
  apply_defaults(c);
  validate(c);
  return c;
}

MineConfig load_config(const std::string& path, MineConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return parse_config(in, std::move(base));
}

std::string format_config(const MineConfig& c) {
  std::ostringstream out;
  out << "name = " << c.name << "\ntrucks = " << c.trucks << "\nshovels = " << c.shovels << "\ndumps = " << c.dumps
      << "\nore_shovels = " << c.ore_shovels << "\nore_dumps = " << c.ore_dumps << "\nload_time = " << join(std::vector{c.load_time})
      << "\nunload_time = " << join(std::vector{c.unload_time}) << "\ntruck_load = " << c.truck_load
      << "\nshift = " << join(std::vector{c.shift}) << "\nshovel_time = " << join(c.shovel_time)
      << "\ndump_time = " << join(c.dump_time) << "\nshovel_max_obs = " << join(c.shovel_max_obs)
      << "\ndump_max_obs = " << join(c.dump_max_obs) << '\n';
  return out.str();
}

std::string generate(const MineConfig& c, Direction direction) {
  validate(c);
  std::ostringstream o;
  o << "// Open-pit mine: " << c.trucks << " trucks, " << c.shovels << " shovels (" << c.ore_shovels << " ore), "
    << c.dumps << " dumps (" << c.ore_dumps << " ore).\n\n";
  o << "const int NR_TRUCKS = " << c.trucks << ";\n"
    << "const real LOAD_TIME = " << real_literal(c.load_time) << ";\n"
    << "const real UNLOAD_TIME = " << real_literal(c.unload_time) << ";\n"
    << "const int TRK_LOAD = " << c.truck_load << ";\n"
    << "const real SHIFT = " << real_literal(c.shift) << ";\n";
  for (int i = 0; i < c.shovels; ++i)
    o << "const real T_TIME_" << i << " = " << real_literal(c.shovel_time[i]) << ";\n"
      << "const int MAX_OBS_SHV_" << i << " = " << c.shovel_max_obs[i] << ";\n";
  for (int j = 0; j < c.dumps; ++j)
    o << "const real H_TIME_" << j << " = " << real_literal(c.dump_time[j]) << ";\n"
      << "const int MAX_OBS_DMP_" << j << " = " << c.dump_max_obs[j] << ";\n";
  o << "\nreward load;\n";

  o << "\nprocess Init {\n  remaining : [0..NR_TRUCKS] init NR_TRUCKS;\n";
  for (int i = 0; i < c.shovels; ++i)
    o << "  [" << init_to_shovel(i) << "] remaining > 0 -> (remaining' = remaining - 1);\n";
  for (int j = 0; j < c.dumps; ++j)
    o << "  [" << init_to_dump(j) << "] remaining > 0 -> (remaining' = remaining - 1);\n";
  o << "}\n";

  auto site = [&](const std::string& p, const std::string& max_obs, const std::string& travel, const std::string& service,
                  const std::string& flag, const std::vector<std::string>& incoming,
                  const std::vector<std::string>& outgoing, bool reward) {
    const std::string q = p + "_queue", r = p + "_road", s = p + "_stress", f = p + "_" + flag;
    o << "\nprocess " << (p[0] == 's' ? "Shovel" : "Dump") << p.substr(3) << " {\n"
      << "  " << q << " : [0..NR_TRUCKS] init 0;\n"
      << "  " << r << " : [0..NR_TRUCKS] init 0;\n"
      << "  observable " << s << " : [0.." << max_obs << "] init 0;\n"
      << "  observable " << f << " : bool init false;\n";
    for (const auto& a : incoming)
      o << "  [" << a << "] true -> (" << r << "' = " << r << " + 1) & (" << s << "' = min(" << r << " + 1 + " << q
        << ", " << max_obs << "));\n";
    o << "  rate(" << r << " / " << travel << ") " << r << " > 0 -> (" << q << "' = " << q << " + 1) & (" << r
      << "' = " << r << " - 1);\n";
    o << "  rate(1 / " << service << ") " << q << " > 0 -> (" << q << "' = " << q << " - 1) & (" << s << "' = min("
      << r << " + " << q << " - 1, " << max_obs << "))";
    if (reward) o << " & (load' = TRK_LOAD)";
    o << " & (" << f << "' = true);\n";
    for (const auto& a : outgoing) o << "  [" << a << "] " << f << " -> (" << f << "' = false);\n";
    o << "}\n";
  };

  for (int i = 0; i < c.shovels; ++i) {
    std::vector<std::string> in{init_to_shovel(i)}, out;
    for (int j = 0; j < c.dumps; ++j) in.push_back(dump_to_shovel(j, i));
    for (int j = 0; j < c.dumps; ++j)
      if (compatible(c, i, j)) out.push_back(shovel_to_dump(i, j));
    site(shv(i), "MAX_OBS_SHV_" + std::to_string(i), "T_TIME_" + std::to_string(i), "LOAD_TIME", "full", in, out, false);
  }
  for (int j = 0; j < c.dumps; ++j) {
    std::vector<std::string> in{init_to_dump(j)}, out;
    for (int i = 0; i < c.shovels; ++i)
      if (compatible(c, i, j)) in.push_back(shovel_to_dump(i, j));
    for (int i = 0; i < c.shovels; ++i) out.push_back(dump_to_shovel(j, i));
    site(dmp(j), "MAX_OBS_DMP_" + std::to_string(j), "H_TIME_" + std::to_string(j), "UNLOAD_TIME", "empty", in, out, true);
  }
  o << "\nproperty " << (direction == Direction::Max ? "Xmax" : "Xmin") << "[T == SHIFT](S(load));\n";
  return o.str();
}

dsl::NetworkModel build_mine(const MineConfig& c, Direction direction) { return dsl::parse(generate(c, direction)); }

Query property_spec(const MineConfig& c, Direction direction) {
  if (!(c.shift >= 0)) throw ModelError("SHIFT must be non-negative");
  return Query{direction, c.shift, "load"};
}

Combinations combinations(const MineConfig& c) {
  const int k = c.ore_shovels, l = c.ore_dumps;
  return Combinations{k * l + (c.shovels - k) * (c.dumps - l), c.shovels * c.dumps, k * l};
}

Combinations count_labels(const Model& model, const MineConfig& c) {
  Combinations out;
  for (const auto& a : model.actions()) {
    if (a.rfind("shv_", 0) == 0 && a.find("_to_dmp_") != std::string::npos) ++out.shovel_to_dump;
    if (a.rfind("dmp_", 0) == 0 && a.find("_to_shv_") != std::string::npos) ++out.dump_to_shovel;
  }
  const auto has = [&](const std::string& label) {
    return std::find(model.actions().begin(), model.actions().end(), label) != model.actions().end();
  };
  for (int i = 0; i < c.ore_shovels; ++i)
    for (int j = 0; j < c.ore_dumps; ++j) out.ore += has(shovel_to_dump(i, j));
  return out;
}

std::vector<CatalogCheck> validate_catalog() {
  std::vector<CatalogCheck> out;
  for (const auto& r : kCatalog) {
    const MineConfig c = instance(r.name);
    const Combinations f = combinations(c);
    const Network net = load_network(build_mine(c));
    const Combinations m = count_labels(net, c);
    out.push_back({r.name, "shovel->dump", r.published.shovel_to_dump, f.shovel_to_dump, m.shovel_to_dump});
    out.push_back({r.name, "dump->shovel", r.published.dump_to_shovel, f.dump_to_shovel, m.dump_to_shovel});
    out.push_back({r.name, "ore->ore", r.published.ore, f.ore, m.ore});
  }
  return out;
}

ConservationMonitor::ConservationMonitor(const Network& net, const MineConfig& c) : trucks_(c.trucks) {
  auto need = [&](const std::string& name) {
    const std::size_t i = net.variable_index(name);
    if (i == net.variables().size()) throw ModelError("conservation monitor: model has no variable " + name);
    counted_.push_back(i);
  };
  need("remaining");
  for (int i = 0; i < c.shovels; ++i)
    for (const char* v : {"_queue", "_road", "_full"}) need(shv(i) + v);
  for (int j = 0; j < c.dumps; ++j)
    for (const char* v : {"_queue", "_road", "_empty"}) need(dmp(j) + v);
}

void ConservationMonitor::check(const State& s) const {
  long total = 0;
  for (std::size_t i : counted_) total += s.values[i];
  if (total != trucks_)
    throw SimulationError("truck conservation violated: " + std::to_string(total) + " trucks accounted for, expected " +
                          std::to_string(trucks_));
}

}  // namespace masched::mine
