#include "support.hpp"

#include "masched/error.hpp"

#include <doctest.h>

#include <algorithm>

using namespace masched;
using namespace masched::test;

namespace {

std::vector<std::string> enabled_labels(const Network& net, const State& s) {
  Enabled e;
  net.enabled(s, e);
  std::vector<std::string> out;
  for (ActionId a : e.actions) out.push_back(net.actions()[a]);
  return out;
}

}  // namespace

TEST_CASE("shared labels synchronise their processes") {
  const Network net = compile(R"(
reward r;
process Shovel {
  full : bool init true;
  [go] full -> (full' = false);
}
process Dump {
  road : [0..3] init 0;
  [go] true -> (road' = road + 1);
  rate(1) road > 0 -> (road' = road - 1) & (r' = 2);
}
)", "r");
  State s = net.initial_state();
  Enabled e;
  net.enabled(s, e);
  REQUIRE(e.choice_count() == 1);
  CHECK(net.actions()[e.actions[0]] == "go");
  net.take(s, e, 0, 0);
  CHECK(s.values == std::vector<Value>{0, 1});
  net.enabled(s, e);
  CHECK_FALSE(e.probabilistic());
  REQUIRE(e.rates.size() == 1);
  CHECK(net.take(s, e, 0, 0) == 2.0);
  CHECK(s.values == std::vector<Value>{0, 0});
  net.enabled(s, e);
  CHECK(e.deadlock());
}

TEST_CASE("a synchronised label waits for every participant") {
  const Network net = compile(R"(
reward r;
process A { x : [0..1] init 0; [s] x == 0 -> (x' = 1); }
process B { y : [0..1] init 1; [s] y == 0 -> (y' = 1); rate(1) true -> true; }
)", "r");
  Enabled e;
  net.enabled(net.initial_state(), e);
  CHECK_FALSE(e.probabilistic());
  CHECK(e.rates.size() == 1);
}

TEST_CASE("multi-way synchronisation multiplies branches") {
  const Network net = compile(R"(
reward r;
process A { x : [0..2] init 0; [s] x == 0 -> 1 : (x' = 1) + 3 : (x' = 2) & (r' = 1); }
process B { y : [0..2] init 0; [s] y == 0 -> 0.5 : (y' = 1) + 0.5 : (y' = 2) & (r' = 10); }
process C { z : [0..1] init 0; [s] true -> (z' = 1); [s] true -> (z' = 0); }
)", "r");
  Enabled e;
  const State s0 = net.initial_state();
  net.enabled(s0, e);
  // C has two commands on [s]: two composed transitions, 2 x 2 branches each.
  REQUIRE(e.choice_count() == 2);
  for (std::size_t t = 0; t < 2; ++t) {
    const auto p = e.branches(t);
    REQUIRE(p.size() == 4);
    CHECK(p[0] == doctest::Approx(0.125));
    CHECK(p[1] == doctest::Approx(0.125));
    CHECK(p[2] == doctest::Approx(0.375));
    CHECK(p[3] == doctest::Approx(0.375));
  }
  State s = s0;
  CHECK(net.take(s, e, 0, 3) == 11.0);
  CHECK(s.values == std::vector<Value>{2, 2, 1});
  s = s0;
  CHECK(net.take(s, e, 1, 0) == 0.0);
  CHECK(s.values == std::vector<Value>{1, 1, 0});
}

TEST_CASE("internal and single-process labels fire alone") {
  const Network net = compile(R"(
reward r;
process A { x : [0..1] init 0; [] x == 0 -> (x' = 1); [only_a] x == 0 -> (x' = 1); }
process B { y : [0..1] init 0; [] y == 0 -> (y' = 1); }
)", "r");
  auto labels = enabled_labels(net, net.initial_state());
  std::sort(labels.begin(), labels.end());
  CHECK(labels.size() == 3);
  CHECK(std::count(labels.begin(), labels.end(), "only_a") == 1);
}

TEST_CASE("maximal progress") {
  const Network net = compile(R"(
reward r;
process A {
  x : [0..1] init 0;
  [a] x == 0 -> (x' = 1);
  rate(5) true -> true;
  rate(2) x == 1 -> (x' = 0);
}
)", "r");
  Enabled e;
  net.enabled(net.initial_state(), e);
  CHECK(e.probabilistic());
  CHECK(e.rates.empty());
  State s = net.initial_state();
  net.take(s, e, 0, 0);
  net.enabled(s, e);
  CHECK_FALSE(e.probabilistic());
  CHECK(e.rates.size() == 2);
  CHECK(e.exit_rate() == 7.0);
}

TEST_CASE("rates depend on the state") {
  const Network net = compile(R"(
const real T_TIME = 8.0;
reward r = road * 2;
process A {
  road : [0..4] init 3;
  rate(road / T_TIME) road > 0 -> (road' = road - 1);
}
)", "r");
  Enabled e;
  const State s = net.initial_state();
  net.enabled(s, e);
  REQUIRE(e.rates.size() == 1);
  CHECK(e.rates[0] == 3.0 / 8.0);
  CHECK(net.rate_reward(s) == 6.0);
}

TEST_CASE("non-positive rates abort") {
  const Network net = compile(R"(
reward r;
process A { x : [0..3] init 0; rate(x) true -> true; }
)", "r");
  Enabled e;
  CHECK_THROWS_AS(net.enabled(net.initial_state(), e), SimulationError);
}

TEST_CASE("updates read the pre-state") {
  const Network net = compile(R"(
reward r;
process A {
  x : [0..5] init 1;
  y : [0..5] init 2;
  [swap] true -> (x' = y) & (y' = x) & (r' = x + y);
}
)", "r");
  State s = net.initial_state();
  Enabled e;
  net.enabled(s, e);
  CHECK(net.take(s, e, 0, 0) == 3.0);
  CHECK(s.values == std::vector<Value>{2, 1});
}

TEST_CASE("reward selection") {
  const char* text = R"(
reward first;
reward second = 1;
process A { x : [0..1] init 0; [a] x == 0 -> (x' = 1) & (first' = 4) & (second' = 7); rate(1) true -> true; }
property Xmin[T == 2](S(second));
)";
  const dsl::NetworkModel m = dsl::parse(text);
  Network net = load_network(m);
  CHECK(net.reward() == "second");
  State s = net.initial_state();
  Enabled e;
  net.enabled(s, e);
  CHECK(net.take(s, e, 0, 0) == 7.0);
  CHECK(net.rate_reward(s) == 1.0);
  Network other = load_network(m, "first");
  s = other.initial_state();
  other.enabled(s, e);
  CHECK(other.take(s, e, 0, 0) == 4.0);
  CHECK(other.rate_reward(s) == 0.0);
  CHECK_THROWS_AS(load_network(m, "third"), ModelError);
}

TEST_CASE("variable lookup and observables") {
  const Network net = compile(R"(
reward r;
process A { a1 : [0..1] init 0; observable a2 : [-2..3] init -1; rate(1) true -> true; }
process B { observable b1 : bool init true; rate(1) true -> true; }
)", "r");
  CHECK(net.variables() == std::vector<std::string>{"a1", "a2", "b1"});
  CHECK(net.observable_variables() == std::vector<std::size_t>{1, 2});
  CHECK(net.variable_index("b1") == 2);
  CHECK(net.variable_index("zz") == 3);
  CHECK(net.lower(1) == -2);
  CHECK(net.upper(1) == 3);
  CHECK(net.initial_state().values == std::vector<Value>{0, -1, 1});
}
