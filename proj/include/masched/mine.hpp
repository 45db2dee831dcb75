#pragma once

#include "masched/network.hpp"
#include "masched/sim.hpp"
#include "masched/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace masched::mine {

struct MineConfig {
  std::string name = "custom";
  int trucks = 5;        // NR_TRUCKS
  int shovels = 1;       // N_S
  int dumps = 2;         // N_D
  int ore_shovels = 0;   // k
  int ore_dumps = 0;     // l
  std::vector<double> shovel_time;  // t_time per shovel
  std::vector<double> dump_time;    // h_time per dump
  double load_time = 2.0;
  double unload_time = 1.5;
  int truck_load = 1;    // TRK_LOAD
  std::vector<int> shovel_max_obs;
  std::vector<int> dump_max_obs;
  double shift = 200.0;  // SHIFT
};

// Fills unset per-site values with the defaults: travel times from fixed lists indexed
// by site, MAX_OBS = max(2, ceil(travel / service time)).
void apply_defaults(MineConfig& c);
// Throws ModelError naming the broken invariant.
void validate(const MineConfig& c);

// One of the named instances (name = truck count): 4, 5, 9, 10, 35, 40, 80.
MineConfig instance(int name);
std::vector<int> instance_names();

// key = value lines, '#' comments; lists are comma separated. Keys not given keep the
// values of `base`.
MineConfig parse_config(std::istream& in, MineConfig base = {});
MineConfig load_config(const std::string& path, MineConfig base = {});
std::string format_config(const MineConfig& c);

// Network model text (the .man language).
std::string generate(const MineConfig& c, Direction direction = Direction::Max);
dsl::NetworkModel build_mine(const MineConfig& c, Direction direction = Direction::Max);
Query property_spec(const MineConfig& c, Direction direction = Direction::Max);

// Action label names.
std::string init_to_shovel(int i);
std::string init_to_dump(int j);
std::string shovel_to_dump(int i, int j);
std::string dump_to_shovel(int j, int i);
bool compatible(const MineConfig& c, int shovel, int dump);

struct Combinations {
  int shovel_to_dump = 0;
  int dump_to_shovel = 0;
  int ore = 0;
  friend bool operator==(const Combinations&, const Combinations&) = default;
};

// From the site counts.
Combinations combinations(const MineConfig& c);
// By counting the dispatch labels of a generated model; ore pairs are the labels
// from an ore shovel to an ore dump.
Combinations count_labels(const Model& model, const MineConfig& c);

struct CatalogCheck {
  int instance = 0;
  std::string row;
  int expected = 0;
  int formula = 0;
  int model = 0;
  bool ok() const { return expected == formula && expected == model; }
};

// Recomputes the three combination rows for every catalog instance and compares with
// the published table.
std::vector<CatalogCheck> validate_catalog();

// Trucks are conserved: sum of queues, roads, pending dispatches (full/empty flags)
// and undispatched trucks equals NR_TRUCKS in every state.
class ConservationMonitor final : public StateMonitor {
 public:
  ConservationMonitor(const Network& net, const MineConfig& c);
  void check(const State& s) const override;

 private:
  std::vector<std::size_t> counted_;
  int trucks_;
};

}  // namespace masched::mine
