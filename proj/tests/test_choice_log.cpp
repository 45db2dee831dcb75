#include "masched/choice_log.hpp"
#include "masched/error.hpp"
#include "masched/rng.hpp"
#include "masched/strategy_table.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

using namespace masched;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("masched-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::uint32_t fnv_reference(const std::vector<std::string>& vars, const std::vector<std::string>& acts) {
  std::uint32_t h = 2166136261u;
  const auto byte = [&](unsigned char c) { h = (h ^ c) * 16777619u; };
  for (const auto* list : {&vars, &acts}) {
    for (const std::string& s : *list) {
      for (char c : s) byte(static_cast<unsigned char>(c));
      byte(0);
    }
    byte(0xff);
  }
  return h;
}

std::vector<std::uint8_t> file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_le(std::vector<std::uint8_t>& out, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

// Random observations with an action that is a function of the observation, so the
// log is consistent; many observations repeat.
std::map<std::vector<Value>, ActionId> fill_log(ChoiceLogWriter& w, std::size_t arity, std::size_t n,
                                                std::uint64_t seed, int spread) {
  Rng rng(RngStream{seed, stream_index(stream_tag::test, 50)});
  std::map<std::vector<Value>, ActionId> oracle;
  std::vector<Value> obs(arity);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t mix = 0;
    for (Value& v : obs) {
      v = static_cast<Value>(rng.below(static_cast<std::uint64_t>(2 * spread + 1))) - spread;
      mix = mix * 31 + static_cast<std::uint64_t>(v + spread);
    }
    const auto action = static_cast<ActionId>(mix % 5);
    oracle[obs] = action;
    w.record(obs, action);
  }
  return oracle;
}

std::vector<std::uint8_t> expected_body(const std::map<std::vector<Value>, ActionId>& oracle) {
  std::vector<std::uint8_t> out;
  for (const auto& [obs, a] : oracle) {
    for (Value v : obs) put_le(out, static_cast<std::uint32_t>(v), 4);
    put_le(out, a, 2);
  }
  return out;
}

const std::vector<std::string> kVars{"p", "q", "r"};
const std::vector<std::string> kActs{"a0", "a1", "a2", "a3", "a4"};

}  // namespace

TEST_CASE("layout hash and header") {
  CHECK(layout_hash(kVars, kActs) == fnv_reference(kVars, kActs));
  const std::vector<std::string> swapped{"q", "p", "r"};
  CHECK(layout_hash(swapped, kActs) != layout_hash(kVars, kActs));
  const std::vector<std::string> joined{"pq", "r"};
  const std::vector<std::string> split{"p", "qr"};
  CHECK(layout_hash(joined, kActs) != layout_hash(split, kActs));

  TempDir dir;
  const std::string path = dir.file("h.sal");
  {
    ChoiceLogWriter w(path, 3, layout_hash(kVars, kActs));
    const std::vector<Value> o{-1, 2, 70000};
    w.record(o, 4);
    w.close();
  }
  const std::vector<std::uint8_t> bytes = file_bytes(path);
  std::vector<std::uint8_t> expect{'M', 'S', 'A', 'L'};
  put_le(expect, 1, 4);
  put_le(expect, fnv_reference(kVars, kActs), 4);
  put_le(expect, 14, 4);
  put_le(expect, static_cast<std::uint32_t>(-1), 4);
  put_le(expect, 2, 4);
  put_le(expect, 70000, 4);
  put_le(expect, 4, 2);
  CHECK(bytes == expect);
  const SalHeader h = read_sal_header(path);
  CHECK(h.record_size == 14);
  CHECK(h.layout_hash == layout_hash(kVars, kActs));
}

TEST_CASE("records order by signed observation, then action") {
  std::uint8_t a[10], b[10];
  encode_record(std::vector<Value>{-3, 5}, 1, a);
  encode_record(std::vector<Value>{2, 0}, 0, b);
  CHECK(compare_records(a, b, 2) < 0);
  CHECK(compare_records(b, a, 2) > 0);
  encode_record(std::vector<Value>{-3, 5}, 0, b);
  CHECK(compare_records(b, a, 2) < 0);
  CHECK(compare_records(a, a, 2) == 0);
  std::vector<Value> obs;
  ActionId act = 0;
  decode_record(a, 2, obs, act);
  CHECK(obs == std::vector<Value>{-3, 5});
  CHECK(act == 1);
}

TEST_CASE("external sort matches an in-memory oracle") {
  TempDir dir;
  const std::uint32_t hash = layout_hash(kVars, kActs);
  struct Case {
    std::size_t n;
    int spread;
    std::size_t budget;
    std::size_t fan_in;
  };
  for (const Case& c : {Case{0, 3, 1 << 20, 64}, Case{1, 3, 1 << 20, 64}, Case{5000, 4, 1 << 20, 64},
                        Case{20000, 6, 2048, 2}, Case{20000, 40, 4096, 3}, Case{30000, 1000, 8192, 5}}) {
    CAPTURE(c.n);
    CAPTURE(c.budget);
    const std::string raw = dir.file("raw.sal"), sorted = dir.file("sorted.sal"), twice = dir.file("twice.sal");
    std::map<std::vector<Value>, ActionId> oracle;
    {
      ChoiceLogWriter w(raw, 3, hash);
      oracle = fill_log(w, 3, c.n, c.n + c.budget, c.spread);
      w.close();
    }
    SortOptions opts;
    opts.memory_budget = c.budget;
    opts.fan_in = c.fan_in;
    opts.temp_dir = dir.path.string();
    const SortStats stats = sort_dedup(raw, sorted, opts);
    CHECK(stats.input_records == c.n);
    CHECK(stats.output_records == oracle.size());
    if (c.budget < 10000 && c.n > 0) CHECK(stats.merge_passes >= 2);

    std::vector<std::uint8_t> bytes = file_bytes(sorted);
    REQUIRE(bytes.size() >= kSalHeaderSize);
    const std::vector<std::uint8_t> raw_bytes = file_bytes(raw);
    CHECK(std::equal(bytes.begin(), bytes.begin() + kSalHeaderSize, raw_bytes.begin()));
    CHECK(std::vector<std::uint8_t>(bytes.begin() + kSalHeaderSize, bytes.end()) == expected_body(oracle));

    sort_dedup(sorted, twice, opts);
    CHECK(file_bytes(twice) == bytes);

    const StrategyTable t = table_from_log(sorted, kVars, kActs);
    CHECK(t.size() == oracle.size());
    for (const auto& [obs, a] : oracle) {
      const ActionId* found = t.find(obs);
      REQUIRE(found);
      CHECK(*found == a);
    }
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
    CHECK(files == 3);
  }
}

TEST_CASE("conflicting actions are a consistency error") {
  TempDir dir;
  const std::string raw = dir.file("raw.sal");
  {
    ChoiceLogWriter w(raw, 3, layout_hash(kVars, kActs));
    Rng rng(RngStream{1, 1});
    for (int i = 0; i < 3000; ++i) {
      const std::vector<Value> o{static_cast<Value>(rng.below(10)), 1, 2};
      w.record(o, static_cast<ActionId>(o[0] % 3));
    }
    const std::vector<Value> bad{4, 1, 2};
    w.record(bad, 4);
    w.close();
  }
  SortOptions opts;
  opts.memory_budget = 1024;
  opts.fan_in = 2;
  opts.variable_names = kVars;
  opts.action_names = kActs;
  try {
    sort_dedup(raw, dir.file("out.sal"), opts);
    FAIL("expected a consistency error");
  } catch (const ConsistencyError& e) {
    const std::string what = e.what();
    CHECK(what.find("(p=4, q=1, r=2)") != std::string::npos);
    CHECK(what.find("a4") != std::string::npos);
  }
}

TEST_CASE("concatenation checks the layout") {
  TempDir dir;
  const std::string a = dir.file("a.sal"), b = dir.file("b.sal"), c = dir.file("c.sal"), out = dir.file("all.sal");
  const std::vector<Value> o{1, 2, 3};
  {
    ChoiceLogWriter wa(a, 3, 7), wb(b, 3, 7), wc(c, 3, 8);
    wa.record(o, 1);
    wb.record(o, 2);
    wb.record(o, 3);
    wc.record(o, 1);
  }
  const std::vector<std::string> ok{a, b};
  concatenate_logs(ok, out);
  CHECK(read_log_records(out).size() == 3 * 14);
  const std::vector<std::string> mixed{a, c};
  CHECK_THROWS_AS(concatenate_logs(mixed, out), IoError);
  CHECK_THROWS_AS(table_from_log(a, kVars, kActs), IoError);
}

TEST_CASE("truncated and foreign files are rejected") {
  TempDir dir;
  const std::string p = dir.file("bad.sal");
  {
    std::ofstream f(p, std::ios::binary);
    f << "NOPE0000000000000000";
  }
  CHECK_THROWS_AS(read_sal_header(p), IoError);
  {
    ChoiceLogWriter w(p, 1, 0);
    w.record(std::vector<Value>{1}, 0);
  }
  std::filesystem::resize_file(p, fs::file_size(p) - 1);
  CHECK_THROWS_AS(read_log_records(p), IoError);
}

TEST_CASE("strategy table text round trip") {
  StrategyTable t({"x", "y"}, {"go", "stay", "wait"});
  t.insert(Observation{{1, -2}}, 2);
  t.insert(Observation{{0, 5}}, 0);
  t.insert(Observation{{0, 5}}, 0);
  CHECK(t.size() == 2);
  CHECK(t.rows().front().first.values == std::vector<Value>{0, 5});
  CHECK_THROWS_AS(t.insert(Observation{{0, 5}}, 1), ConsistencyError);

  std::ostringstream out;
  t.write(out);
  CHECK(out.str() == "# masched strategy table v1\nvars: x y\nactions: go stay wait\n0 5 go\n1 -2 wait\n");
  std::istringstream in(out.str());
  CHECK(StrategyTable::read(in) == t);

  for (const char* bad : {"# masched strategy table v1\nvars: x y\nactions: go\n0 go\n",
                          "# masched strategy table v1\nvars: x y\nactions: go\n0 1 run\n",
                          "# masched strategy table v1\nvars: x y\nactions: go\n0 1 go\n0 1 go\n",
                          "# masched strategy table v1\nvars: x y\nactions: go\n0 z go\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS(StrategyTable::read(b));
  }
}
