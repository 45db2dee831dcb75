#include "support.hpp"

#include "masched/error.hpp"
#include "masched/policy.hpp"
#include "masched/rng.hpp"
#include "masched/sim.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace masched;
using namespace masched::test;

namespace {

Rng test_rng(std::uint64_t i) { return Rng(RngStream{12345, stream_index(stream_tag::test, i)}); }

// Always takes the transition labelled `label`.
class FixedPolicy final : public Policy {
 public:
  FixedPolicy(const Model& m, std::string label) {
    action_ = static_cast<ActionId>(std::find(m.actions().begin(), m.actions().end(), label) - m.actions().begin());
  }
  std::size_t choose(std::span<const Value>, const Enabled& e, Rng&) const override {
    return static_cast<std::size_t>(std::find(e.actions.begin(), e.actions.end(), action_) - e.actions.begin());
  }
  std::string name() const override { return "fixed"; }

 private:
  ActionId action_ = 0;
};

struct CountingSink final : DecisionSink {
  std::vector<ActionId> seen;
  void record(std::span<const Value>, ActionId a) override { seen.push_back(a); }
};

const char* const kSelfLoop = R"(
reward r = 1;
process P { x : [0..0] init 0; rate(1) true -> true; }
)";

}  // namespace

TEST_CASE("time bound zero collects nothing") {
  const Network net = compile(kSelfLoop, "r");
  UniformPolicy u;
  Rng rng = test_rng(0);
  const RunResult r = run(net, ObservationMap::all(net), u, 0.0, rng);
  CHECK(r.reward == 0.0);
  CHECK(r.steps == 0);
}

TEST_CASE("rate reward is truncated at the bound") {
  const Network net = compile(kSelfLoop, "r");
  const ObservationMap obs = ObservationMap::all(net);
  UniformPolicy u;
  Simulator sim(net, obs);
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng rng = test_rng(i);
    const RunResult r = sim.run(u, 200.0, rng);
    CHECK(r.reward == 200.0);
    CHECK(r.end_time > 200.0);
  }
}

TEST_CASE("example automaton: branch reward on a is collected once") {
  const Network net = compile(kExampleModel);
  const ObservationMap obs = ObservationMap::all(net);
  const FixedPolicy always_a(net, "a");
  const FixedPolicy always_b(net, "b");
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng = test_rng(i);
    CHECK(run(net, obs, always_a, 10.0, rng).reward == 1.0);
    Rng rng2 = test_rng(i);
    CHECK(run(net, obs, always_b, 10.0, rng2).reward == 0.0);
  }
}

TEST_CASE("explicit and compiled example agree run by run") {
  const Network net = compile(kExampleModel);
  const ExplicitModel ex(example_automaton(1.0));
  const ObservationMap on = ObservationMap::all(net);
  const ObservationMap oe = ObservationMap::all(ex);
  UniformPolicy u;
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng a = test_rng(i), b = test_rng(i);
    const RunResult x = run(net, on, u, 3.0, a);
    const RunResult y = run(ex, oe, u, 3.0, b);
    CHECK(x.reward == y.reward);
    CHECK(x.steps == y.steps);
    CHECK(x.end_time == y.end_time);
  }
}

TEST_CASE("deadlock is reported with its time") {
  const Network net = compile(R"(
reward r;
process P { x : [0..1] init 0; rate(2) x == 0 -> (x' = 1); }
)", "r");
  UniformPolicy u;
  Rng rng = test_rng(1);
  try {
    run(net, ObservationMap::all(net), u, 1e9, rng);
    FAIL("no deadlock");
  } catch (const SimulationError& e) {
    CHECK(std::string(e.what()).rfind("deadlock at t=", 0) == 0);
  }
  Rng early = test_rng(1);
  CHECK_NOTHROW(run(net, ObservationMap::all(net), u, 0.0, early));
}

TEST_CASE("step cap") {
  const Network net = compile(R"(
reward r;
process P { x : [0..1] init 0; [a] true -> (x' = 1 - x); [b] true -> (x' = 1 - x); }
)", "r");
  UniformPolicy u;
  Rng rng = test_rng(2);
  RunOptions opts;
  opts.step_cap = 1000;
  CHECK_THROWS_AS(run(net, ObservationMap::all(net), u, 1.0, rng, opts), SimulationError);
}

TEST_CASE("decisions are recorded only for real choices") {
  const Network net = compile(R"(
reward r;
process P {
  x : [0..2] init 0;
  [a] x == 0 -> (x' = 1);
  [b] x == 0 -> (x' = 1);
  [c] x == 1 -> (x' = 2);
  rate(1) x == 2 -> true;
}
)", "r");
  UniformPolicy u;
  CountingSink sink;
  RunOptions opts;
  opts.sink = &sink;
  Rng rng = test_rng(3);
  run(net, ObservationMap::all(net), u, 5.0, rng, opts);
  REQUIRE(sink.seen.size() == 1);
  CHECK(sink.seen[0] <= 1);
}

TEST_CASE("sojourn times in B follow Exp(7)") {
  const std::vector<double> rates{3.0, 4.0};
  const std::size_t n = 100000;
  std::vector<double> xs;
  xs.reserve(n);
  std::size_t rate4 = 0;
  Rng rng = test_rng(4);
  double sum = 0, sq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [dt, k] = sample_markovian(rates, rng);
    xs.push_back(dt);
    sum += dt;
    sq += dt * dt;
    rate4 += k == 1;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0 / 7.0) <= 3 * se);

  // Kolmogorov-Smirnov against the exponential CDF, alpha = 0.01.
  std::sort(xs.begin(), xs.end());
  double d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = 1.0 - std::exp(-7.0 * xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));

  // Rate-4 branch with probability 4/7: chi-square with one degree of freedom.
  const double e4 = n * 4.0 / 7.0, e3 = n * 3.0 / 7.0;
  const double o4 = static_cast<double>(rate4), o3 = static_cast<double>(n - rate4);
  const double chi = (o4 - e4) * (o4 - e4) / e4 + (o3 - e3) * (o3 - e3) / e3;
  CHECK(chi < boost::math::quantile(boost::math::chi_squared(1), 0.99));
}

TEST_CASE("branch sampling") {
  Rng rng = test_rng(5);
  const std::vector<double> single{1.0};
  CHECK(sample_branch(single, rng) == 0);
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  std::vector<double> counts(4, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[sample_branch(p, rng)] += 1;
  double chi = 0;
  for (int k = 0; k < 4; ++k) chi += (counts[k] - n * p[k]) * (counts[k] - n * p[k]) / (n * p[k]);
  CHECK(chi < boost::math::quantile(boost::math::chi_squared(3), 0.99));
  const std::pair<double, std::size_t> one = sample_markovian(std::vector<double>{2.5}, rng);
  CHECK(one.second == 0);
  CHECK(one.first > 0);
}
