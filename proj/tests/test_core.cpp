#include "support.hpp"

#include "masched/error.hpp"
#include "masched/rng.hpp"

#include <doctest.h>

#include <set>

using namespace masched;
using namespace masched::test;

TEST_CASE("exit rate sums the Markovian rates") {
  const MarkovAutomaton ma = example_automaton();
  CHECK(exit_rate(ma, kB) == 7.0);
  CHECK(exit_rate(ma, kX) == 1.0);
  CHECK(exit_rate(ma, kI) == 0.0);
  for (StateIndex s = 0; s < ma.size(); ++s) {
    double fold = 0;
    for (const auto& t : ma.markovian(s)) fold += t.rate;
    CHECK(exit_rate(ma, s) == fold);
  }
}

TEST_CASE("embedded branch probabilities sum to one") {
  const MarkovAutomaton ma = example_automaton();
  for (StateIndex s = 0; s < ma.size(); ++s) {
    if (ma.markovian(s).empty()) continue;
    double sum = 0;
    for (const auto& t : ma.markovian(s)) sum += t.rate / exit_rate(ma, s);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("maximal progress drops Markovian transitions of probabilistic states") {
  MarkovAutomaton ma({"s"}, {"a"});
  for (int i = 0; i < 3; ++i) ma.add_state(State{{i}});
  ma.add_probabilistic(0, 0, {{1.0, 1, 0.0}});
  ma.add_markovian(0, 2.0, 1);
  ma.add_markovian(0, 3.0, 2);
  ma.add_markovian(1, 1.0, 2);
  ma.add_markovian(2, 1.0, 2);
  const MarkovAutomaton reduced = maximal_progress(ma);
  CHECK(reduced.probabilistic(0).size() == 1);
  CHECK(reduced.markovian(0).empty());
  CHECK(reduced.markovian(1).size() == 1);

  SUBCASE("no mixed states: unchanged") {
    const MarkovAutomaton me = example_automaton();
    const MarkovAutomaton r = maximal_progress(me);
    for (StateIndex s = 0; s < me.size(); ++s) {
      CHECK(r.probabilistic(s).size() == me.probabilistic(s).size());
      CHECK(r.markovian(s).size() == me.markovian(s).size());
    }
  }
}

TEST_CASE("deadlock check") {
  MarkovAutomaton ma = example_automaton();
  const StateIndex sink = ma.add_state(State{{9}});
  CHECK_FALSE(deadlock_check(ma, kX));
  CHECK_FALSE(deadlock_check(ma, kI));
  CHECK(deadlock_check(ma, sink));
}

TEST_CASE("distributions are validated and rescaled") {
  MarkovAutomaton ma({"s"}, {"a"});
  ma.add_state(State{{0}});
  ma.add_state(State{{1}});
  CHECK_THROWS_AS(ma.add_probabilistic(0, 0, {{0.5, 0, 0.0}, {0.4, 1, 0.0}}), ModelError);
  CHECK_THROWS_AS(ma.add_probabilistic(0, 0, {{1.5, 0, 0.0}, {-0.5, 1, 0.0}}), ModelError);
  CHECK_THROWS_AS(ma.add_markovian(0, 0.0, 1), ModelError);
  ma.add_probabilistic(0, 0, {{0.5 + 4e-10, 0, 0.0}, {0.5, 1, 0.0}});
  const auto& br = ma.probabilistic(0)[0].branches;
  CHECK(br[0].probability + br[1].probability == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(br[0].probability > br[1].probability);
}

TEST_CASE("observation projection") {
  ExplicitModel m(example_automaton());
  const State s = m.initial_state();
  CHECK(ObservationMap::all(m).observe(s).values == s.values);
  CHECK(ObservationMap::declared(m).observe(s).values.empty());
  const std::vector<std::string> bad{"nope"};
  CHECK_THROWS_AS(ObservationMap::of(m, bad), ModelError);

  const Network net = compile(R"(
reward r;
process Shovel {
  queue : [0..5] init 2;
  road : [0..5] init 1;
  observable stress : [0..4] init 3;
  observable full : bool init true;
  rate(1) true -> true;
}
)", "r");
  const ObservationMap obs = ObservationMap::declared(net);
  const Observation o = obs.observe(net.initial_state());
  CHECK(o.values == std::vector<Value>{3, 1});
  std::vector<Value> again;
  obs.project(net.initial_state(), again);
  CHECK(again == o.values);
}

TEST_CASE("explicit model view applies maximal progress") {
  MarkovAutomaton ma({"s"}, {"a"});
  ma.add_state(State{{0}});
  ma.add_state(State{{1}});
  ma.add_probabilistic(0, 0, {{1.0, 1, 0.0}});
  ma.add_markovian(0, 5.0, 1);
  ma.add_markovian(1, 1.0, 0);
  ExplicitModel m(std::move(ma));
  Enabled e;
  m.enabled(m.initial_state(), e);
  CHECK(e.probabilistic());
  CHECK(e.rates.empty());
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(RngStream{7, 3}), b(RngStream{7, 3}), c(RngStream{7, 4}), d(RngStream{8, 3});
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a.next();
    CHECK(x == b.next());
    seen.insert(x);
    seen.insert(c.next());
    seen.insert(d.next());
  }
  CHECK(seen.size() == 3000);
  CHECK(stream_index(stream_tag::smc, 1) != stream_index(stream_tag::smc, 2));
  CHECK(stream_index(stream_tag::smc, 1) != stream_index(stream_tag::qlearning, 1));
  CHECK(stream_index(stream_tag::lss_round, 1, 2) != stream_index(stream_tag::lss_round, 2, 1));
}

TEST_CASE("rng ranges") {
  Rng r(RngStream{1, stream_index(stream_tag::test, 0)});
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double v = r.uniform_open_closed();
    CHECK((v > 0.0 && v <= 1.0));
    CHECK(r.below(3) < 3);
  }
  CHECK(r.below(1) == 0);
  CHECK(r.below(0) == 0);
}

TEST_CASE("direction helpers") {
  CHECK(better(Direction::Max, 2, 1));
  CHECK_FALSE(better(Direction::Max, 1, 1));
  CHECK(better(Direction::Min, 1, 2));
  CHECK(parse_direction("min") == Direction::Min);
  CHECK(to_string(Direction::Max) == "max");
  CHECK_THROWS_AS(parse_direction("up"), ModelError);
}
