#include "support.hpp"

#include "masched/error.hpp"
#include "masched/mine.hpp"
#include "masched/rng.hpp"
#include "masched/sim.hpp"

#include <doctest.h>

using namespace masched;
using namespace masched::test;

namespace {

// First diagnostic message of a failing parse.
std::string first_error(const std::string& text) {
  try {
    dsl::parse(text);
  } catch (const ParseError& e) {
    REQUIRE_FALSE(e.diagnostics().empty());
    return e.diagnostics().front().message;
  }
  FAIL("model was accepted");
  return {};
}

}  // namespace

TEST_CASE("example model has five reachable states") {
  const Network net = compile(kExampleModel);
  const MarkovAutomaton ma = explore(net);
  CHECK(ma.size() == 5);
  const StateIndex b = ma.find(State{{3}});
  REQUIRE(b < ma.size());
  CHECK(exit_rate(ma, b) == 7.0);
  CHECK(ma.probabilistic(ma.initial()).size() == 2);
  CHECK(net.actions() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("syntax errors carry positions") {
  try {
    dsl::parse("const int N = 3;\nprocess P {\n  x : [0..N] init 0\n}\n");
    FAIL("accepted");
  } catch (const ParseError& e) {
    REQUIRE(e.diagnostics().size() == 1);
    CHECK(e.diagnostics()[0].line == 4);
    CHECK(e.diagnostics()[0].column == 1);
  }
  CHECK_THROWS_AS(dsl::parse("process P { x : [0..1] init 0; [a] x == 0 -> (x' = 1) }"), ParseError);
  CHECK_THROWS_AS(dsl::parse("/* open"), ParseError);
}

TEST_CASE("declaration and typing errors") {
  CHECK(first_error("const int N = 1;") == "no processes");
  CHECK(first_error("process P { x : [0..1] init 0; [a] y == 0 -> true; }").find("undeclared identifier 'y'") !=
        std::string::npos);
  CHECK(first_error("process P { x : [0..5] init 6; rate(1) true -> true; }").find("outside") != std::string::npos);
  CHECK(first_error("process P { x : [0..1] init 0; [a] x -> true; }") == "guard must be boolean");
  CHECK(first_error("process P { x : [0..1] init 0; [a] true -> 0.5 : (x' = 1) + -0.5 : (x' = 0); }") ==
        "branch weight must be non-negative");
  CHECK(first_error("process P { x : [0..1] init 0; [a] true -> 0 : (x' = 1); }") ==
        "branch weights must have a positive sum");
  CHECK(first_error("process P { x : [0..1] init 0; [a] true -> (x' = 1) & (x' = 0); }").find("assigned twice") !=
        std::string::npos);
  CHECK(first_error("process P { x : [0..1] init 0; [tau] true -> true; }").find("reserved") != std::string::npos);
  CHECK(first_error("process P { x : [0..4] init 0; [a] true -> (x' = x / 2); }").find("real-valued") !=
        std::string::npos);
  CHECK(first_error("reward r; process P { x : [0..4] init 0; [a] r > 0 -> true; }").find("cannot be read") !=
        std::string::npos);
  CHECK(first_error("process P { x : [0..1] init 0; rate(1) true -> true; }\n"
                    "process Q { y : [0..1] init 0; [a] true -> (x' = 1); }")
            .find("cannot assign") != std::string::npos);
  CHECK(first_error("process P { x : [0..1] init 0; rate(1) true -> true; }\nproperty Xmax[T == 3](S(w));")
            .find("undeclared reward") != std::string::npos);
  CHECK(first_error("process P { x : [0..1] init 0; [a] true -> 0.5 * x : (x' = 1); }").find("not allowed") !=
        std::string::npos);
}

TEST_CASE("every problem is reported") {
  try {
    dsl::parse("process P { x : [0..1] init 0; [a] z -> (w' = 1); }");
    FAIL("accepted");
  } catch (const ParseError& e) {
    CHECK(e.diagnostics().size() >= 2);
  }
}

TEST_CASE("pretty printer round trip") {
  const dsl::NetworkModel m = dsl::parse(kExampleModel);
  const std::string printed = dsl::print(m);
  const dsl::NetworkModel again = dsl::parse(printed);
  CHECK(again == m);
  CHECK(dsl::print(again) == printed);

  SUBCASE("generated mine models") {
    for (int name : {5, 9, 35}) {
      const dsl::NetworkModel mine = mine::build_mine(mine::instance(name));
      const dsl::NetworkModel reparsed = dsl::parse(dsl::print(mine));
      CHECK(reparsed == mine);
    }
  }

  SUBCASE("operators keep their meaning") {
    const char* text = R"(
const int A = 7;
const real B = (A - 2) * 3 / 4;
const bool C = !(A > 3) || A % 4 == 3 && true;
const int D = A > 5 ? min(A, 3, 9) : max(-A, 2);
const real E = floor(2.5) + ceil(1.2) + abs(-3) - -1;
process P { x : [0..1] init 0; rate(1) true -> true; }
)";
    const dsl::NetworkModel a = dsl::parse(text);
    const dsl::NetworkModel b = dsl::parse(dsl::print(a));
    CHECK(a == b);
    for (std::size_t i = 0; i < a.constants.size(); ++i)
      CHECK(dsl::evaluate_constant(a, a.constants[i].value) == dsl::evaluate_constant(b, b.constants[i].value));
    CHECK(dsl::evaluate_constant(a, a.constants[1].value) == 3.75);
    CHECK(dsl::evaluate_constant(a, a.constants[2].value) == 1.0);
    CHECK(dsl::evaluate_constant(a, a.constants[3].value) == 3.0);
    CHECK(dsl::evaluate_constant(a, a.constants[4].value) == 8.0);
  }
}

TEST_CASE("declared query") {
  const dsl::NetworkModel m = dsl::parse(kExampleModel);
  const auto q = dsl::declared_query(m);
  REQUIRE(q);
  CHECK(q->direction == Direction::Max);
  CHECK(q->bound == 10.0);
  CHECK(q->reward == "r");
  CHECK_FALSE(dsl::declared_query(dsl::parse("process P { x : [0..1] init 0; rate(1) true -> true; }")));
}

TEST_CASE("assignment outside the bounds aborts the run") {
  const Network net = compile(R"(
reward r;
process P {
  x : [0..5] init 5;
  [a] true -> (x' = x + 1);
}
)", "r");
  UniformPolicy u;
  Rng rng(RngStream{1, 0});
  try {
    run(net, ObservationMap::all(net), u, 1.0, rng);
    FAIL("no error");
  } catch (const SimulationError& e) {
    CHECK(std::string(e.what()).find("variable 'x' assigned 6 outside [0..5]") != std::string::npos);
  }
}
