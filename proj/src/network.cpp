#include "masched/network.hpp"

#include "dsl_scope.hpp"
#include "masched/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <utility>

namespace masched {
namespace detail {

namespace {

using Op = Code::Op;

Op binary_op(const std::string& op) {
  static const std::map<std::string, Op> ops = {
      {"+", Op::Add}, {"-", Op::Sub}, {"*", Op::Mul}, {"/", Op::Div}, {"%", Op::Mod},
      {"<", Op::Lt},  {"<=", Op::Le}, {">", Op::Gt},  {">=", Op::Ge}, {"==", Op::Eq},
      {"!=", Op::Ne}, {"&&", Op::And}, {"||", Op::Or},
  };
  return ops.at(op);
}

Op call_op(const std::string& fn) {
  if (fn == "min") return Op::Min;
  if (fn == "max") return Op::Max;
  if (fn == "floor") return Op::Floor;
  if (fn == "ceil") return Op::Ceil;
  return Op::Abs;
}

class Compiler {
 public:
  explicit Compiler(const dsl::detail::Scope& scope) : scope_(scope) {}

  std::vector<Code::Instr> compile(const dsl::Expr& e) {
    std::vector<Code::Instr> out;
    emit(e, out);
    return out;
  }

 private:
  static bool all_const(const std::vector<std::vector<Code::Instr>>& parts) {
    for (const auto& p : parts)
      if (p.size() != 1 || p[0].op != Op::Const) return false;
    return true;
  }

  void emit(const dsl::Expr& e, std::vector<Code::Instr>& out) {
    using K = dsl::Expr::Kind;
    switch (e.kind) {
      case K::Number: out.push_back({Op::Const, 0, e.number}); return;
      case K::Boolean: out.push_back({Op::Const, 0, e.boolean ? 1.0 : 0.0}); return;
      case K::Name:
        if (const auto* c = scope_.constant(e.name)) {
          out.push_back({Op::Const, 0, c->value});
        } else {
          out.push_back({Op::Var, static_cast<std::uint32_t>(scope_.variable(e.name)->index), 0.0});
        }
        return;
      default: break;
    }
    std::vector<std::vector<Code::Instr>> parts;
    for (const auto& a : e.args) parts.push_back(compile(a));
    Code::Instr instr{Op::Const, 0, 0.0};
    if (e.kind == K::Unary) instr.op = e.name == "!" ? Op::Not : Op::Neg;
    if (e.kind == K::Binary) instr.op = binary_op(e.name);
    if (e.kind == K::Ternary) instr.op = Op::Select;
    if (e.kind == K::Call) {
      instr.op = call_op(e.name);
      instr.arg = static_cast<std::uint32_t>(parts.size());
    }
    if (all_const(parts)) {
      std::vector<Code::Instr> program;
      for (const auto& p : parts) program.push_back(p[0]);
      program.push_back(instr);
      out.push_back({Op::Const, 0, Code(std::move(program)).eval(nullptr)});
      return;
    }
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    out.push_back(instr);
  }

  const dsl::detail::Scope& scope_;
};

std::size_t stack_depth(const std::vector<Code::Instr>& program) {
  std::size_t depth = 0, max_depth = 0;
  for (const auto& in : program) {
    switch (in.op) {
      case Op::Const:
      case Op::Var: ++depth; break;
      case Op::Neg:
      case Op::Not:
      case Op::Floor:
      case Op::Ceil:
      case Op::Abs: break;
      case Op::Select: depth -= 2; break;
      case Op::Min:
      case Op::Max: depth -= in.arg - 1; break;
      default: --depth; break;
    }
    max_depth = std::max(max_depth, depth);
  }
  return max_depth;
}

}  // namespace

Code::Code(std::vector<Instr> program) : program_(std::move(program)) {
  if (stack_depth(program_) > kMaxStack) throw ModelError("expression too deeply nested");
}

double Code::eval(const Value* vars) const noexcept {
  double st[kMaxStack];
  std::size_t sp = 0;
  for (const auto& in : program_) {
    switch (in.op) {
      case Op::Const: st[sp++] = in.value; break;
      case Op::Var: st[sp++] = static_cast<double>(vars[in.arg]); break;
      case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Op::Not: st[sp - 1] = st[sp - 1] == 0.0 ? 1.0 : 0.0; break;
      case Op::Floor: st[sp - 1] = std::floor(st[sp - 1]); break;
      case Op::Ceil: st[sp - 1] = std::ceil(st[sp - 1]); break;
      case Op::Abs: st[sp - 1] = std::abs(st[sp - 1]); break;
      case Op::Select: {
        sp -= 2;
        st[sp - 1] = st[sp - 1] != 0.0 ? st[sp] : st[sp + 1];
        break;
      }
      case Op::Min:
      case Op::Max: {
        const std::size_t n = in.arg;
        double v = st[sp - n];
        for (std::size_t i = sp - n + 1; i < sp; ++i) v = in.op == Op::Min ? std::min(v, st[i]) : std::max(v, st[i]);
        sp -= n;
        st[sp++] = v;
        break;
      }
      default: {
        const double b = st[--sp];
        double& a = st[sp - 1];
        switch (in.op) {
          case Op::Add: a = a + b; break;
          case Op::Sub: a = a - b; break;
          case Op::Mul: a = a * b; break;
          case Op::Div: a = a / b; break;
          case Op::Mod: a = std::fmod(a, b); break;
          case Op::Lt: a = a < b ? 1.0 : 0.0; break;
          case Op::Le: a = a <= b ? 1.0 : 0.0; break;
          case Op::Gt: a = a > b ? 1.0 : 0.0; break;
          case Op::Ge: a = a >= b ? 1.0 : 0.0; break;
          case Op::Eq: a = a == b ? 1.0 : 0.0; break;
          case Op::Ne: a = a != b ? 1.0 : 0.0; break;
          case Op::And: a = (a != 0.0 && b != 0.0) ? 1.0 : 0.0; break;
          case Op::Or: a = (a != 0.0 || b != 0.0) ? 1.0 : 0.0; break;
          default: break;
        }
      }
    }
  }
  return st[0];
}

}  // namespace detail

namespace {
constexpr std::uint32_t kNoLabel = std::numeric_limits<std::uint32_t>::max();
}

Network::Network(const dsl::NetworkModel& model, const std::string& reward) : reward_(reward) {
  dsl::check(model);
  std::vector<Diagnostic> diags;
  dsl::detail::Scope scope(model, diags);
  bool known_reward = false;
  for (const auto& r : model.rewards) {
    if (r.name != reward) continue;
    known_reward = true;
    if (r.rate) rate_reward_ = detail::Code(detail::Compiler(scope).compile(*r.rate));
  }
  if (!known_reward) throw ModelError("unknown reward '" + reward + "'");
  detail::Compiler compiler(scope);
  auto code = [&](const dsl::Expr& e) { return detail::Code(compiler.compile(e)); };

  for (const auto& v : scope.variables()) {
    var_names_.push_back(v.name);
    vars_.push_back(Var{v.lower, v.upper, v.init, v.type == dsl::Type::Bool});
    if (v.observable) observable_.push_back(v.index);
  }

  auto label_of = [&](const std::string& name) {
    for (std::uint32_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == name) return i;
    labels_.push_back(name);
    syncs_.push_back(Sync{name == "tau", {}});
    return static_cast<std::uint32_t>(labels_.size() - 1);
  };

  for (std::uint32_t p = 0; p < model.processes.size(); ++p) {
    for (const auto& c : model.processes[p].commands) {
      CompiledCommand cc;
      cc.markovian = c.kind == dsl::Command::Kind::Markovian;
      cc.process = p;
      cc.guard = code(c.guard);
      cc.label = kNoLabel;
      if (cc.markovian) {
        cc.rate = code(c.rate);
      } else {
        cc.label = label_of(c.action.empty() ? "tau" : c.action);
      }
      double total = 0.0;
      for (const auto& b : c.branches) total += scope.evaluate(b.weight);
      for (const auto& b : c.branches) {
        CompiledBranch cb;
        cb.probability = cc.markovian ? 1.0 : scope.evaluate(b.weight) / total;
        for (const auto& a : b.update) {
          if (scope.is_reward(a.target)) {
            if (a.target == reward) cb.rewards.push_back(code(a.value));
            continue;
          }
          cb.updates.push_back(Update{static_cast<std::uint32_t>(scope.variable(a.target)->index), code(a.value)});
        }
        cc.branches.push_back(std::move(cb));
      }
      const auto id = static_cast<std::uint32_t>(commands_.size());
      (cc.markovian ? markovian_ : probabilistic_).push_back(id);
      if (!cc.markovian) {
        auto& parts = syncs_[cc.label].participants;
        if (syncs_[cc.label].internal) {
          if (parts.empty()) parts.emplace_back();
          parts[0].push_back(id);
        } else {
          if (parts.empty() || commands_[parts.back().front()].process != p) parts.emplace_back();
          parts.back().push_back(id);
        }
      }
      commands_.push_back(std::move(cc));
    }
  }
}

std::size_t Network::variable_index(const std::string& name) const {
  for (std::size_t i = 0; i < var_names_.size(); ++i)
    if (var_names_[i] == name) return i;
  return var_names_.size();
}

State Network::initial_state() const {
  State s;
  s.values.reserve(vars_.size());
  for (const auto& v : vars_) s.values.push_back(v.init);
  return s;
}

void Network::enabled(const State& s, Enabled& out) const {
  out.clear();
  const Value* vals = s.values.data();
  auto& guard = out.scratch;
  guard.resize(commands_.size());
  for (std::uint32_t c : probabilistic_) guard[c] = commands_[c].guard.eval(vals) != 0.0;

  auto push = [&](std::uint32_t label, const std::uint32_t* parts, std::size_t n) {
    out.actions.push_back(label);
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) {
      out.parts.push_back(parts[i]);
      combos *= commands_[parts[i]].branches.size();
    }
    out.part_begin.push_back(static_cast<std::uint32_t>(out.parts.size()));
    for (std::size_t b = 0; b < combos; ++b) {
      double p = 1.0;
      std::size_t rest = b;
      for (std::size_t i = n; i-- > 0;) {
        const auto& br = commands_[parts[i]].branches;
        p *= br[rest % br.size()].probability;
        rest /= br.size();
      }
      out.branch_prob.push_back(p);
    }
    out.branch_begin.push_back(static_cast<std::uint32_t>(out.branch_prob.size()));
  };

  for (std::uint32_t l = 0; l < syncs_.size(); ++l) {
    const auto& sync = syncs_[l];
    if (sync.internal) {
      for (std::uint32_t c : sync.participants[0])
        if (guard[c]) push(l, &c, 1);
      continue;
    }
    auto& work = out.work;
    auto& off = out.work_offsets;
    work.clear();
    off.clear();
    bool all = true;
    for (const auto& cmds : sync.participants) {
      off.push_back(static_cast<std::uint32_t>(work.size()));
      for (std::uint32_t c : cmds)
        if (guard[c]) work.push_back(c);
      if (work.size() == off.back()) {
        all = false;
        break;
      }
    }
    if (!all) continue;
    off.push_back(static_cast<std::uint32_t>(work.size()));
    const std::size_t n = sync.participants.size();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= off[i + 1] - off[i];
    // Mixed-radix enumeration, last participant least significant.
    const std::size_t base = work.size();
    for (std::size_t k = 0; k < combos; ++k) {
      work.resize(base + n);
      std::size_t rest = k;
      for (std::size_t i = n; i-- > 0;) {
        const std::size_t width = off[i + 1] - off[i];
        work[base + i] = work[off[i] + rest % width];
        rest /= width;
      }
      push(l, &work[base], n);
    }
  }
  if (out.probabilistic()) return;

  for (std::uint32_t c : markovian_) {
    const auto& cmd = commands_[c];
    if (cmd.guard.eval(vals) == 0.0) continue;
    const double rate = cmd.rate.eval(vals);
    if (!(rate > 0.0) || !std::isfinite(rate))
      throw SimulationError("rate evaluates to " + std::to_string(rate) + " (must be positive and finite)");
    out.rates.push_back(rate);
    out.parts.push_back(c);
    out.part_begin.push_back(static_cast<std::uint32_t>(out.parts.size()));
  }
}

double Network::take(State& s, const Enabled& e, std::size_t transition, std::size_t branch) const {
  thread_local std::vector<std::pair<std::uint32_t, double>> pending;
  pending.clear();
  const Value* vals = s.values.data();
  double reward = 0.0;
  const auto parts = e.parts_of(transition);
  std::size_t rest = e.probabilistic() ? branch : 0;
  for (std::size_t i = parts.size(); i-- > 0;) {
    const auto& br = commands_[parts[i]].branches;
    const auto& b = br[rest % br.size()];
    rest /= br.size();
    for (const auto& r : b.rewards) reward += r.eval(vals);
    for (const auto& u : b.updates) pending.emplace_back(u.var, u.value.eval(vals));
  }
  for (const auto& [var, value] : pending) {
    const auto& v = vars_[var];
    double x = value;
    if (v.boolean) x = x != 0.0 ? 1.0 : 0.0;
    if (!(x >= v.lower && x <= v.upper)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      throw SimulationError("variable '" + var_names_[var] + "' assigned " + buf + " outside [" +
                            std::to_string(v.lower) + ".." + std::to_string(v.upper) + "]");
    }
    s.values[var] = static_cast<Value>(x);
  }
  return reward;
}

double Network::rate_reward(const State& s) const { return rate_reward_.eval(s.values.data()); }

Network load_network(const dsl::NetworkModel& model, std::string reward) {
  if (reward.empty()) {
    if (!model.property) throw ModelError("no reward given and the model declares no property");
    reward = model.property->reward;
  }
  return Network(model, reward);
}

}  // namespace masched
