#include "masched/choice_log.hpp"

#include "masched/error.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <memory>
#include <numeric>

#include <unistd.h>

namespace masched {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'M', 'S', 'A', 'L'};

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::int32_t get_i32(const std::uint8_t* p) { return static_cast<std::int32_t>(get_u32(p)); }

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (static_cast<std::uint16_t>(p[1]) << 8));
}

std::FILE* open_file(const std::string& path, const char* mode) {
  std::FILE* f = std::fopen(path.c_str(), mode);
  if (!f) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  return f;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

void write_header(std::FILE* f, const SalHeader& h, const std::string& path) {
  std::uint8_t buf[kSalHeaderSize];
  std::memcpy(buf, kMagic, 4);
  put_u32(buf + 4, h.version);
  put_u32(buf + 8, h.layout_hash);
  put_u32(buf + 12, h.record_size);
  if (std::fwrite(buf, 1, sizeof buf, f) != sizeof buf) throw IoError("write failed: " + path);
}

SalHeader parse_header(std::FILE* f, const std::string& path) {
  std::uint8_t buf[kSalHeaderSize];
  if (std::fread(buf, 1, sizeof buf, f) != sizeof buf || std::memcmp(buf, kMagic, 4) != 0)
    throw IoError(path + ": not a strategy action log");
  SalHeader h{get_u32(buf + 4), get_u32(buf + 8), get_u32(buf + 12)};
  if (h.version != SalHeader::kVersion) throw IoError(path + ": unsupported log version " + std::to_string(h.version));
  if (h.record_size < 2 || (h.record_size - 2) % 4 != 0) throw IoError(path + ": bad record size");
  return h;
}

std::uint64_t record_count(const std::string& path, const SalHeader& h) {
  const auto size = fs::file_size(path);
  if (size < kSalHeaderSize || (size - kSalHeaderSize) % h.record_size != 0)
    throw IoError(path + ": truncated log (size is not a whole number of records)");
  return (size - kSalHeaderSize) / h.record_size;
}

// Buffered sequential reader over the records of one file.
class RecordReader {
 public:
  RecordReader(const std::string& path, std::size_t record_size, std::size_t buffer_bytes)
      : file_(open_file(path, "rb")), record_size_(record_size) {
    parse_header(file_.get(), path);
    const std::size_t records = std::max<std::size_t>(1, buffer_bytes / record_size);
    buffer_.resize(records * record_size);
    refill();
  }

  bool done() const noexcept { return pos_ >= end_; }
  const std::uint8_t* current() const noexcept { return buffer_.data() + pos_; }
  void advance() {
    pos_ += record_size_;
    if (pos_ >= end_) refill();
  }

 private:
  void refill() {
    const std::size_t got = std::fread(buffer_.data(), 1, buffer_.size(), file_.get());
    end_ = got - got % record_size_;
    pos_ = 0;
  }

  File file_;
  std::size_t record_size_;
  std::vector<std::uint8_t> buffer_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

// Tournament of losers over k sources; exhausted sources compare greater than any record.
class LoserTree {
 public:
  LoserTree(std::vector<RecordReader>& sources, std::size_t arity)
      : src_(sources), arity_(arity), k_(sources.size()), tree_(k_) {
    winner_ = k_ == 1 ? 0 : play(1);
  }

  bool empty() const { return src_[winner_].done(); }
  const std::uint8_t* top() const { return src_[winner_].current(); }

  void pop() {
    src_[winner_].advance();
    std::size_t cur = winner_;
    for (std::size_t node = (winner_ + k_) / 2; node >= 1; node /= 2) {
      if (less(tree_[node], cur)) std::swap(tree_[node], cur);
    }
    winner_ = cur;
  }

 private:
  bool less(std::size_t a, std::size_t b) const {
    if (src_[a].done()) return false;
    if (src_[b].done()) return true;
    const int c = compare_records(src_[a].current(), src_[b].current(), arity_);
    return c < 0 || (c == 0 && a < b);
  }

  std::size_t play(std::size_t node) {
    if (node >= k_) return node - k_;
    const std::size_t l = play(2 * node);
    const std::size_t r = play(2 * node + 1);
    if (less(r, l)) {
      tree_[node] = l;
      return r;
    }
    tree_[node] = r;
    return l;
  }

  std::vector<RecordReader>& src_;
  std::size_t arity_;
  std::size_t k_;
  std::vector<std::size_t> tree_;
  std::size_t winner_ = 0;
};

// Suppresses adjacent duplicates and, when `check` is set, adjacent conflicts.
class DedupWriter {
 public:
  DedupWriter(ChoiceLogWriter& out, std::size_t arity, std::uint32_t record_size, const SortOptions& opts, bool check)
      : out_(out), arity_(arity), record_size_(record_size), opts_(opts), check_(check), prev_(record_size) {}

  void push(const std::uint8_t* rec) {
    if (have_prev_) {
      if (std::memcmp(prev_.data(), rec, record_size_) == 0) return;
      if (check_ && std::memcmp(prev_.data(), rec, record_size_ - 2) == 0) conflict(rec);
    }
    std::memcpy(prev_.data(), rec, record_size_);
    have_prev_ = true;
    out_.write_raw(rec);
  }

 private:
  [[noreturn]] void conflict(const std::uint8_t* rec) const {
    std::vector<Value> obs;
    ActionId a = 0, b = 0;
    decode_record(prev_.data(), arity_, obs, a);
    decode_record(rec, arity_, obs, b);
    std::string where = "observation ";
    if (opts_.variable_names.size() == arity_) {
      where += "(";
      for (std::size_t i = 0; i < arity_; ++i) where += (i ? ", " : "") + opts_.variable_names[i] + "=" + std::to_string(obs[i]);
      where += ")";
    } else {
      where += format_observation(obs);
    }
    auto name = [&](ActionId x) {
      return x < opts_.action_names.size() ? opts_.action_names[x] : "#" + std::to_string(x);
    };
    throw ConsistencyError(where + " is mapped to two different actions, '" + name(a) + "' and '" + name(b) +
                           "'; the observation does not determine the enabled actions");
  }

  ChoiceLogWriter& out_;
  std::size_t arity_;
  std::uint32_t record_size_;
  const SortOptions& opts_;
  bool check_;
  std::vector<std::uint8_t> prev_;
  bool have_prev_ = false;
};

}  // namespace

std::uint32_t layout_hash(std::span<const std::string> variables, std::span<const std::string> actions) {
  std::uint32_t h = 2166136261u;
  auto feed = [&](unsigned char c) {
    h ^= c;
    h *= 16777619u;
  };
  auto feed_list = [&](std::span<const std::string> names) {
    for (const auto& n : names) {
      for (unsigned char c : n) feed(c);
      feed(0);
    }
    feed(0xff);
  };
  feed_list(variables);
  feed_list(actions);
  return h;
}

SalHeader read_sal_header(const std::string& path) {
  File f(open_file(path, "rb"));
  return parse_header(f.get(), path);
}

void encode_record(std::span<const Value> obs, ActionId action, std::uint8_t* out) {
  for (Value v : obs) {
    put_u32(out, static_cast<std::uint32_t>(v));
    out += 4;
  }
  out[0] = static_cast<std::uint8_t>(action);
  out[1] = static_cast<std::uint8_t>(action >> 8);
}

void decode_record(const std::uint8_t* in, std::size_t arity, std::vector<Value>& obs, ActionId& action) {
  obs.resize(arity);
  for (std::size_t i = 0; i < arity; ++i) obs[i] = get_i32(in + 4 * i);
  action = get_u16(in + 4 * arity);
}

int compare_records(const std::uint8_t* a, const std::uint8_t* b, std::size_t arity) {
  for (std::size_t i = 0; i < arity; ++i) {
    const std::int32_t x = get_i32(a + 4 * i), y = get_i32(b + 4 * i);
    if (x != y) return x < y ? -1 : 1;
  }
  const std::uint16_t x = get_u16(a + 4 * arity), y = get_u16(b + 4 * arity);
  return x == y ? 0 : (x < y ? -1 : 1);
}

// ---------------------------------------------------------------- writer

ChoiceLogWriter::ChoiceLogWriter(const std::string& path, std::size_t arity, std::uint32_t hash)
    : path_(path), file_(open_file(path, "wb")), arity_(arity), record_size_(sal_record_size(arity)) {
  write_header(file_, SalHeader{SalHeader::kVersion, hash, record_size_}, path_);
  buffer_.resize(std::max<std::size_t>(record_size_, (std::size_t{1} << 20) / record_size_ * record_size_));
}

ChoiceLogWriter::~ChoiceLogWriter() {
  try {
    close();
  } catch (...) {
  }
}

void ChoiceLogWriter::record(std::span<const Value> obs, ActionId action) {
  if (action > 0xffff) throw IoError("action id does not fit the 16-bit record field");
  if (used_ + record_size_ > buffer_.size()) flush();
  encode_record(obs, action, buffer_.data() + used_);
  used_ += record_size_;
  ++records_;
}

void ChoiceLogWriter::write_raw(const std::uint8_t* rec) {
  if (used_ + record_size_ > buffer_.size()) flush();
  std::memcpy(buffer_.data() + used_, rec, record_size_);
  used_ += record_size_;
  ++records_;
}

void ChoiceLogWriter::flush() {
  if (used_ && std::fwrite(buffer_.data(), 1, used_, file_) != used_) throw IoError("write failed: " + path_);
  used_ = 0;
}

void ChoiceLogWriter::close() {
  if (!file_) return;
  flush();
  const bool ok = std::fclose(file_) == 0;
  file_ = nullptr;
  if (!ok) throw IoError("close failed: " + path_);
}

// ---------------------------------------------------------------- concatenation

void concatenate_logs(std::span<const std::string> inputs, const std::string& output) {
  if (inputs.empty()) throw IoError("no logs to concatenate");
  const SalHeader h = read_sal_header(inputs[0]);
  File out(open_file(output, "wb"));
  write_header(out.get(), h, output);
  std::vector<char> buf(std::size_t{1} << 20);
  for (const auto& in_path : inputs) {
    File in(open_file(in_path, "rb"));
    const SalHeader hi = parse_header(in.get(), in_path);
    if (hi.layout_hash != h.layout_hash || hi.record_size != h.record_size)
      throw IoError(in_path + ": log layout differs from " + inputs[0]);
    record_count(in_path, hi);
    for (std::size_t got; (got = std::fread(buf.data(), 1, buf.size(), in.get())) > 0;)
      if (std::fwrite(buf.data(), 1, got, out.get()) != got) throw IoError("write failed: " + output);
  }
  if (std::fflush(out.get()) != 0) throw IoError("write failed: " + output);
}

// ---------------------------------------------------------------- external sort

SortStats sort_dedup(const std::string& input, const std::string& output, const SortOptions& opts) {
  const SalHeader h = read_sal_header(input);
  const std::size_t rs = h.record_size;
  const std::size_t arity = (rs - 2) / 4;
  if (opts.memory_budget < 2 * rs) throw std::invalid_argument("memory budget must hold at least two records");
  const std::size_t fan_in = std::max<std::size_t>(2, opts.fan_in);

  SortStats stats;
  stats.input_records = record_count(input, h);

  const fs::path dir = opts.temp_dir.empty() ? fs::absolute(output).parent_path() : fs::path(opts.temp_dir);
  const std::string stem = "masched-sort-" + std::to_string(::getpid()) + "-" +
                           std::to_string(reinterpret_cast<std::uintptr_t>(&stats) & 0xffffff);
  std::size_t temp_counter = 0;
  std::vector<std::string> temps;
  auto temp_name = [&] {
    auto p = (dir / (stem + "-" + std::to_string(temp_counter++) + ".sal")).string();
    temps.push_back(p);
    return p;
  };

  // Phase 1: sorted runs. The index costs 4 bytes per record and comes out of the budget.
  const std::size_t chunk_records = std::max<std::size_t>(2, opts.memory_budget / (rs + sizeof(std::uint32_t)));
  std::vector<std::string> runs;
  {
    File in(open_file(input, "rb"));
    parse_header(in.get(), input);
    std::vector<std::uint8_t> chunk(chunk_records * rs);
    std::vector<std::uint32_t> order;
    while (true) {
      const std::size_t got = std::fread(chunk.data(), 1, chunk.size(), in.get()) / rs;
      if (got == 0) break;
      order.resize(got);
      std::iota(order.begin(), order.end(), 0u);
      const std::uint8_t* base = chunk.data();
      std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return compare_records(base + a * rs, base + b * rs, arity) < 0;
      });
      const bool single = runs.empty() && stats.input_records <= chunk_records;
      const std::string path = single ? output : temp_name();
      ChoiceLogWriter w(path, arity, h.layout_hash);
      DedupWriter dedup(w, arity, h.record_size, opts, single);
      for (std::uint32_t i : order) dedup.push(base + std::size_t{i} * rs);
      w.close();
      runs.push_back(path);
      ++stats.chunks;
      if (single) {
        stats.output_records = w.records();
        return stats;
      }
    }
  }
  if (runs.empty()) {
    ChoiceLogWriter w(output, arity, h.layout_hash);
    w.close();
    return stats;
  }

  // Phase 2: merge passes.
  while (true) {
    ++stats.merge_passes;
    std::vector<std::string> next;
    const bool last = runs.size() <= fan_in;
    for (std::size_t g = 0; g < runs.size(); g += fan_in) {
      const std::size_t k = std::min(fan_in, runs.size() - g);
      const std::size_t buffer = std::max(rs, opts.memory_budget / (k + 1));
      std::vector<RecordReader> readers;
      readers.reserve(k);
      for (std::size_t i = 0; i < k; ++i) readers.emplace_back(runs[g + i], rs, buffer);
      const std::string path = last ? output : temp_name();
      ChoiceLogWriter w(path, arity, h.layout_hash);
      DedupWriter dedup(w, arity, h.record_size, opts, last);
      for (LoserTree tree(readers, arity); !tree.empty(); tree.pop()) dedup.push(tree.top());
      w.close();
      if (last) stats.output_records = w.records();
      next.push_back(path);
    }
    if (!opts.keep_temp)
      for (const auto& r : runs) fs::remove(r);
    if (last) break;
    runs = std::move(next);
  }
  return stats;
}

std::vector<std::uint8_t> read_log_records(const std::string& path, SalHeader* header) {
  File f(open_file(path, "rb"));
  const SalHeader h = parse_header(f.get(), path);
  const std::uint64_t n = record_count(path, h);
  std::vector<std::uint8_t> data(n * h.record_size);
  if (n && std::fread(data.data(), 1, data.size(), f.get()) != data.size()) throw IoError("read failed: " + path);
  if (header) *header = h;
  return data;
}

StrategyTable table_from_log(const std::string& path, std::vector<std::string> variables, std::vector<std::string> actions) {
  const SalHeader h = read_sal_header(path);
  const std::size_t arity = (h.record_size - 2) / 4;
  if (arity != variables.size()) throw IoError(path + ": record arity does not match the variable list");
  if (h.layout_hash != layout_hash(variables, actions)) throw IoError(path + ": log was written for a different model layout");
  StrategyTable table(variables, actions);
  RecordReader reader(path, h.record_size, std::size_t{1} << 20);
  std::vector<Value> obs;
  ActionId action = 0;
  for (; !reader.done(); reader.advance()) {
    decode_record(reader.current(), arity, obs, action);
    if (action >= actions.size()) throw IoError(path + ": action id out of range");
    table.append_sorted(Observation{obs}, action);
  }
  return table;
}

}  // namespace masched
