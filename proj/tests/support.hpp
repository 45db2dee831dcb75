#pragma once

#include "masched/dsl.hpp"
#include "masched/markov_automaton.hpp"
#include "masched/network.hpp"

#include <string>

namespace masched::test {

// Example automaton: I --a--> {S1: 0.5, S2: 0.5}, I --b--> B; Markovian S1 -1-> X,
// S2 -2-> S1, B -3-> S2, B -4-> X, X -1-> X.
enum ExampleState : StateIndex { kI = 0, kS1, kS2, kB, kX };

inline MarkovAutomaton example_automaton(double a_reward = 0.0) {
  MarkovAutomaton ma({"s"}, {"a", "b"});
  for (int i = 0; i < 5; ++i) ma.add_state(State{{i}});
  ma.add_probabilistic(kI, 0, {{0.5, kS1, a_reward}, {0.5, kS2, a_reward}});
  ma.add_probabilistic(kI, 1, {{1.0, kB, 0.0}});
  ma.add_markovian(kS1, 1, kX);
  ma.add_markovian(kS2, 2, kS1);
  ma.add_markovian(kB, 3, kS2);
  ma.add_markovian(kB, 4, kX);
  ma.add_markovian(kX, 1, kX);
  ma.set_initial(kI);
  return ma;
}

inline const char* const kExampleModel = R"(// I, S1, S2, B, X
reward r;

process P {
  st : [0..4] init 0;
  [a] st == 0 -> 0.5 : (st' = 1) & (r' = 1) + 0.5 : (st' = 2) & (r' = 1);
  [b] st == 0 -> (st' = 3);
  rate(1) st == 1 -> (st' = 4);
  rate(2) st == 2 -> (st' = 1);
  rate(3) st == 3 -> (st' = 2);
  rate(4) st == 3 -> (st' = 4);
  rate(1) st == 4 -> true;
}

property Xmax[T == 10](S(r));
)";

inline Network compile(const std::string& text, const std::string& reward = {}) {
  return load_network(dsl::parse(text), reward);
}

}  // namespace masched::test
