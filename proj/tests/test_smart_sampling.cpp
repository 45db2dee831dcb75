#include "support.hpp"

#include "masched/error.hpp"
#include "masched/smart_sampling.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

using namespace masched;
using namespace masched::test;

TEST_CASE("halving schedule") {
  const Network net = compile(kExampleModel, "r");
  const ObservationMap obs = ObservationMap::all(net);
  SmartSamplingConfig c;
  c.strategies = 8;
  c.budget = 16;
  c.seed = 5;
  const SmartSamplingResult r = run_smart_sampling(net, obs, 10.0, c);
  CHECK(r.rounds == 3);
  CHECK(r.total_runs == 48);
  CHECK(r.sampled.size() == 8);
  CHECK(std::set<std::uint32_t>(r.sampled.begin(), r.sampled.end()).size() == 8);
  CHECK(std::find(r.sampled.begin(), r.sampled.end(), r.sigma) != r.sampled.end());

  std::size_t per_round[4] = {0, 0, 0, 0};
  for (const RoundEntry& e : r.log) {
    REQUIRE(e.round >= 1);
    REQUIRE(e.round <= 3);
    ++per_round[e.round];
    CHECK(e.runs == 16 / (8 >> (e.round - 1)));
  }
  CHECK(per_round[1] == 8);
  CHECK(per_round[2] == 4);
  CHECK(per_round[3] == 2);

  std::ostringstream out;
  write_round_log(out, r);
  const std::string text = out.str();
  CHECK(text.rfind("round,sigma,runs,mean\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 15);
}

TEST_CASE("survivors are the better half") {
  const Network net = compile(kExampleModel, "r");
  const ObservationMap obs = ObservationMap::all(net);
  for (Direction d : {Direction::Max, Direction::Min}) {
    SmartSamplingConfig c;
    c.strategies = 16;
    c.budget = 64;
    c.seed = 2;
    c.direction = d;
    const SmartSamplingResult r = run_smart_sampling(net, obs, 10.0, c);
    for (std::uint32_t round = 1; round < r.rounds; ++round) {
      std::vector<RoundEntry> here, next;
      for (const RoundEntry& e : r.log) {
        if (e.round == round) here.push_back(e);
        if (e.round == round + 1) next.push_back(e);
      }
      std::set<std::uint32_t> kept;
      for (const RoundEntry& e : next) kept.insert(e.sigma);
      for (const RoundEntry& a : here)
        for (const RoundEntry& b : here)
          if (kept.count(a.sigma) && !kept.count(b.sigma)) CHECK_FALSE(better(d, b.mean, a.mean));
    }
  }
}

TEST_CASE("result depends only on the seed") {
  const Network net = compile(kExampleModel, "r");
  const ObservationMap obs = ObservationMap::all(net);
  SmartSamplingConfig c;
  c.strategies = 32;
  c.budget = 128;
  c.seed = 77;
  const SmartSamplingResult a = run_smart_sampling(net, obs, 10.0, c);
  c.workers = 3;
  const SmartSamplingResult b = run_smart_sampling(net, obs, 10.0, c);
  CHECK(a.sigma == b.sigma);
  CHECK(a.sampled == b.sampled);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].sigma == b.log[i].sigma);
    CHECK(a.log[i].mean == b.log[i].mean);
  }
}

TEST_CASE("invalid parameters") {
  const Network net = compile(kExampleModel, "r");
  const ObservationMap obs = ObservationMap::all(net);
  SmartSamplingConfig c;
  c.strategies = 20;
  c.budget = 10;
  CHECK_THROWS_AS(run_smart_sampling(net, obs, 10.0, c), std::invalid_argument);
  c.strategies = 0;
  CHECK_THROWS_AS(run_smart_sampling(net, obs, 10.0, c), std::invalid_argument);
}

TEST_CASE("a single strategy needs no rounds") {
  const Network net = compile(kExampleModel, "r");
  const ObservationMap obs = ObservationMap::all(net);
  SmartSamplingConfig c;
  c.strategies = 1;
  c.budget = 10;
  const SmartSamplingResult r = run_smart_sampling(net, obs, 10.0, c);
  CHECK(r.sampled.size() == 1);
  CHECK(r.sigma == r.sampled[0]);
}
