#include "support.hpp"

#include "masched/error.hpp"
#include "masched/policy.hpp"
#include "masched/qlearning.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

using namespace masched;
using namespace masched::test;

namespace {

// Every choice is made at time 0; x = 3 is terminal.
const char* const kMdp = R"(
reward r;
process P {
  x : [0..3] init 0;
  [a] x == 0 -> 0.5 : (x' = 1) & (r' = 1) + 0.5 : (x' = 2) & (r' = 1);
  [b] x == 0 -> (x' = 1);
  [c] x == 1 -> (x' = 3) & (r' = 2);
  [d] x == 1 -> (x' = 2);
  [e] x == 2 -> (x' = 3) & (r' = 1);
  [f] x == 2 -> 0.5 : (x' = 3) & (r' = 3) + 0.5 : (x' = 3);
  rate(1) x == 3 -> true;
}
)";

struct Branch {
  double p;
  int next;
  double reward;
};

// Value iteration over the same MDP, written out by hand.
std::map<std::pair<int, std::string>, double> q_oracle(Direction d) {
  const std::map<int, std::vector<std::pair<std::string, std::vector<Branch>>>> mdp{
      {0, {{"a", {{0.5, 1, 1}, {0.5, 2, 1}}}, {"b", {{1, 1, 0}}}}},
      {1, {{"c", {{1, 3, 2}}}, {"d", {{1, 2, 0}}}}},
      {2, {{"e", {{1, 3, 1}}}, {"f", {{0.5, 3, 3}, {0.5, 3, 0}}}}},
  };
  std::map<int, double> v{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  std::map<std::pair<int, std::string>, double> q;
  for (int it = 0; it < 10; ++it) {
    for (const auto& [s, acts] : mdp) {
      double best = 0;
      bool first = true;
      for (const auto& [name, branches] : acts) {
        double val = 0;
        for (const Branch& b : branches) val += b.p * (b.reward + v[b.next]);
        q[{s, name}] = val;
        if (first || better(d, val, best)) best = val;
        first = false;
      }
      v[s] = best;
    }
  }
  return q;
}

ActionId label(const Model& m, const std::string& name) {
  return static_cast<ActionId>(std::find(m.actions().begin(), m.actions().end(), name) - m.actions().begin());
}

}  // namespace

TEST_CASE("linear schedules") {
  const Schedule s{0.5, 0.02, 100'000};
  CHECK(s.value(1) == 0.5);
  CHECK(s.value(100'000) == 0.02);
  CHECK(s.value(200'000) == 0.02);
  CHECK(s.value(50'000) == doctest::Approx(0.5 + (0.02 - 0.5) * 49'999.0 / 99'999.0));
  CHECK(Schedule{1.0, 1.0, 1}.value(7) == 1.0);
  CHECK(s.describe() == "0.5 0.02 linear");
}

TEST_CASE("update rule with full learning rate") {
  const Network net = compile(R"(
reward r;
process P {
  x : [0..2] init 0;
  [a] x == 0 -> (x' = 1) & (r' = 1);
  [b] x == 0 -> (x' = 1) & (r' = 1);
  [c] x == 1 -> (x' = 2) & (r' = 2);
  [d] x == 1 -> (x' = 2) & (r' = 2);
  rate(1) x == 2 -> true;
}
)", "r");
  const ObservationMap obs = ObservationMap::all(net);
  QLearningConfig c;
  c.episodes = 2;
  c.alpha = {1.0, 1.0, 2};
  c.epsilon = {1.0, 1.0, 2};
  c.gamma = 0.5;
  c.key_mode = "FO";
  c.seed = 3;
  const QTable q = run_qlearning(net, obs, 1.0, c);
  // Episode 1 sees no successor row yet: Q(0, .) = 1, Q(1, .) = 2.
  // Episode 2 bootstraps from Q(1, .) = 2: Q(0, .) = 1 + 0.5 * 2.
  const std::vector<Value> s0{0}, s1{1};
  const auto* row0 = q.row(s0);
  const auto* row1 = q.row(s1);
  REQUIRE(row0);
  REQUIRE(row1);
  double top = 0;
  for (const auto& e : *row0) top = std::max(top, e.value);
  CHECK(top == 2.0);
  for (const auto& e : *row0) CHECK((e.value == 1.0 || e.value == 2.0));
  for (const auto& e : *row1) CHECK(e.value == 2.0);
  CHECK(q.meta().key_mode == "FO");
  CHECK(q.meta().episodes == 2);
}

TEST_CASE("learned values approach value iteration") {
  const Network net = compile(kMdp, "r");
  const ObservationMap obs = ObservationMap::all(net);
  for (Direction d : {Direction::Max, Direction::Min}) {
    QLearningConfig c;
    c.episodes = 20'000;
    c.alpha = {0.5, 0.01, c.episodes};
    c.epsilon = {1.0, 0.2, c.episodes};
    c.direction = d;
    c.seed = 8;
    const QTable q = run_qlearning(net, obs, 1.0, c);
    const auto oracle = q_oracle(d);
    for (const auto& [key, value] : oracle) {
      const std::vector<Value> o{key.first};
      CHECK(q.get(o, label(net, key.second)) == doctest::Approx(value).epsilon(0.05));
    }
    const StrategyTable t = q.to_strategy();
    const auto pick = [&](int x) { return t.actions()[*t.find(std::vector<Value>{x})]; };
    if (d == Direction::Max) {
      CHECK(pick(0) == "a");
      CHECK(pick(1) == "c");
      CHECK(pick(2) == "f");
    } else {
      CHECK(pick(0) == "b");
      CHECK(pick(1) == "d");
      CHECK(pick(2) == "e");
    }
  }
}

TEST_CASE("learning is reproducible") {
  const Network net = compile(kMdp, "r");
  const ObservationMap obs = ObservationMap::all(net);
  QLearningConfig c;
  c.episodes = 500;
  c.seed = 12;
  std::ostringstream a, b;
  run_qlearning(net, obs, 1.0, c).write(a);
  run_qlearning(net, obs, 1.0, c).write(b);
  CHECK(a.str() == b.str());
}

TEST_CASE("memory cap") {
  const Network net = compile(kMdp, "r");
  const ObservationMap obs = ObservationMap::all(net);
  QLearningConfig c;
  c.episodes = 10;
  c.memory_cap_bytes = 16;
  CHECK_THROWS_AS(run_qlearning(net, obs, 1.0, c), ResourceError);
}

TEST_CASE("q-table dump round trip and key mode") {
  const Network net = compile(kMdp, "r");
  const ObservationMap obs = ObservationMap::all(net);
  QLearningConfig c;
  c.episodes = 300;
  c.seed = 1;
  const QTable q = run_qlearning(net, obs, 1.0, c);
  std::ostringstream out;
  q.write(out);
  std::istringstream in(out.str());
  const QTable back = QTable::read(in, "PO");
  CHECK(back.rows() == q.rows());
  CHECK(back.entries() == q.entries());
  for (const auto& [o, entries] : q.sorted_rows())
    for (const auto& e : entries) CHECK(back.get(o.values, e.action) == e.value);
  std::ostringstream again;
  back.write(again);
  CHECK(again.str() == out.str());

  std::istringstream wrong(out.str());
  CHECK_THROWS_AS(QTable::read(wrong, "FO"), ModelError);
}

TEST_CASE("invalid configurations") {
  const Network net = compile(kMdp, "r");
  const ObservationMap obs = ObservationMap::all(net);
  QLearningConfig c;
  c.episodes = 0;
  CHECK_THROWS_AS(run_qlearning(net, obs, 1.0, c), std::invalid_argument);
  c.episodes = 1;
  c.gamma = 0;
  CHECK_THROWS_AS(run_qlearning(net, obs, 1.0, c), std::invalid_argument);
}
