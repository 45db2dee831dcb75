#include "dsl_scope.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace masched::dsl {
namespace detail {

double apply_binary(const std::string& op, double a, double b) {
  switch (op[0]) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    case '/': return a / b;
    case '%': return std::fmod(a, b);
    case '<': return (op.size() == 1 ? a < b : a <= b) ? 1.0 : 0.0;
    case '>': return (op.size() == 1 ? a > b : a >= b) ? 1.0 : 0.0;
    case '=': return a == b ? 1.0 : 0.0;
    case '!': return a != b ? 1.0 : 0.0;
    case '&': return (a != 0.0 && b != 0.0) ? 1.0 : 0.0;
    case '|': return (a != 0.0 || b != 0.0) ? 1.0 : 0.0;
  }
  return 0.0;
}

double apply_call(const std::string& fn, const double* args, std::size_t n) {
  if (fn == "min" || fn == "max") {
    double v = args[0];
    for (std::size_t i = 1; i < n; ++i) v = fn == "min" ? std::min(v, args[i]) : std::max(v, args[i]);
    return v;
  }
  if (fn == "floor") return std::floor(args[0]);
  if (fn == "ceil") return std::ceil(args[0]);
  if (fn == "abs") return std::abs(args[0]);
  return 0.0;
}

Scope::Scope(const NetworkModel& model, std::vector<Diagnostic>& diags) : diags_(&diags) {
  std::set<std::string> taken;
  auto claim = [&](const std::string& name, SourcePos pos) {
    if (name == "tau") {
      error(pos, "'tau' is reserved for the internal action");
      return false;
    }
    if (!taken.insert(name).second) {
      error(pos, "duplicate declaration of '" + name + "'");
      return false;
    }
    return true;
  };

  for (const auto& c : model.constants) {
    if (!claim(c.name, c.pos)) continue;
    const auto t = type_of(c.value);
    if (!t) continue;
    if (c.type == Type::Bool ? *t != Type::Bool : !numeric(*t)) {
      error(c.pos, "constant '" + c.name + "' declared " + std::string(to_string(c.type)) + " but has type " +
                       std::string(to_string(*t)));
      continue;
    }
    if (c.type == Type::Int && *t == Type::Real) {
      error(c.pos, "constant '" + c.name + "' declared int but has a real value");
      continue;
    }
    if (!variable_free(c.value)) continue;
    consts_[c.name] = ConstInfo{c.type, evaluate(c.value)};
  }
  for (const auto& r : model.rewards)
    if (claim(r.name, r.pos)) rewards_[r.name] = true;

  for (std::size_t p = 0; p < model.processes.size(); ++p) {
    for (const auto& v : model.processes[p].variables) {
      if (!claim(v.name, v.pos)) continue;
      VarInfo info;
      info.name = v.name;
      info.index = vars_.size();
      info.type = v.type;
      info.process = p;
      info.observable = v.observable;
      bool ok = true;
      auto bound = [&](const Expr& e, const char* what) -> Value {
        const auto t = type_of(e);
        if (!t) return ok = false, 0;
        if (v.type == Type::Bool && std::string_view(what) == "initial value") {
          if (*t != Type::Bool) error(e.pos, "initial value of boolean '" + v.name + "' must be boolean"), ok = false;
        } else if (*t != Type::Int) {
          error(e.pos, std::string(what) + " of '" + v.name + "' must be an integer expression");
          return ok = false, 0;
        }
        if (!variable_free(e)) return ok = false, 0;
        return static_cast<Value>(evaluate(e));
      };
      info.lower = bound(v.lower, "lower bound");
      info.upper = bound(v.upper, "upper bound");
      info.init = bound(v.init, "initial value");
      if (!ok) continue;
      if (info.lower > info.upper) {
        error(v.pos, "empty range for '" + v.name + "'");
        continue;
      }
      if (info.init < info.lower || info.init > info.upper) {
        error(v.init.pos, "initial value " + std::to_string(info.init) + " of '" + v.name + "' outside [" +
                              std::to_string(info.lower) + ".." + std::to_string(info.upper) + "]");
        continue;
      }
      var_index_[v.name] = vars_.size();
      vars_.push_back(std::move(info));
    }
  }
}

const ConstInfo* Scope::constant(const std::string& name) const {
  auto it = consts_.find(name);
  return it == consts_.end() ? nullptr : &it->second;
}

const VarInfo* Scope::variable(const std::string& name) const {
  auto it = var_index_.find(name);
  return it == var_index_.end() ? nullptr : &vars_[it->second];
}

bool Scope::is_reward(const std::string& name) const { return rewards_.count(name) != 0; }

std::optional<Type> Scope::type_of(const Expr& e) const {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Number: return e.integral ? Type::Int : Type::Real;
    case K::Boolean: return Type::Bool;
    case K::Name:
      if (const auto* c = constant(e.name)) return c->type;
      if (const auto* v = variable(e.name)) return v->type;
      if (is_reward(e.name)) {
        error(e.pos, "transient reward '" + e.name + "' cannot be read in expressions");
      } else {
        error(e.pos, "undeclared identifier '" + e.name + "'");
      }
      return std::nullopt;
    case K::Unary: {
      const auto t = type_of(e.args[0]);
      if (!t) return t;
      if (e.name == "!") {
        if (*t == Type::Bool) return Type::Bool;
        error(e.pos, "operand of '!' must be boolean");
      } else {
        if (numeric(*t)) return t;
        error(e.pos, "operand of unary '-' must be numeric");
      }
      return std::nullopt;
    }
    case K::Binary: {
      const auto a = type_of(e.args[0]);
      const auto b = type_of(e.args[1]);
      if (!a || !b) return std::nullopt;
      const std::string& op = e.name;
      if (op == "&&" || op == "||") {
        if (*a == Type::Bool && *b == Type::Bool) return Type::Bool;
        error(e.pos, "operands of '" + op + "' must be boolean");
        return std::nullopt;
      }
      if (op == "==" || op == "!=") {
        if ((*a == Type::Bool) == (*b == Type::Bool)) return Type::Bool;
        error(e.pos, "operands of '" + op + "' must both be boolean or both numeric");
        return std::nullopt;
      }
      if (!numeric(*a) || !numeric(*b)) {
        error(e.pos, "operands of '" + op + "' must be numeric");
        return std::nullopt;
      }
      if (op == "<" || op == "<=" || op == ">" || op == ">=") return Type::Bool;
      if (op == "/") return Type::Real;
      if (op == "%") {
        if (*a == Type::Int && *b == Type::Int) return Type::Int;
        error(e.pos, "operands of '%' must be integers");
        return std::nullopt;
      }
      return (*a == Type::Int && *b == Type::Int) ? Type::Int : Type::Real;
    }
    case K::Ternary: {
      const auto c = type_of(e.args[0]);
      const auto a = type_of(e.args[1]);
      const auto b = type_of(e.args[2]);
      if (!c || !a || !b) return std::nullopt;
      if (*c != Type::Bool) {
        error(e.pos, "condition of '?:' must be boolean");
        return std::nullopt;
      }
      if (*a == Type::Bool && *b == Type::Bool) return Type::Bool;
      if (numeric(*a) && numeric(*b)) return (*a == Type::Int && *b == Type::Int) ? Type::Int : Type::Real;
      error(e.pos, "branches of '?:' have incompatible types");
      return std::nullopt;
    }
    case K::Call: {
      std::vector<Type> ts;
      for (const auto& a : e.args) {
        const auto t = type_of(a);
        if (!t) return std::nullopt;
        if (!numeric(*t)) {
          error(a.pos, "arguments of '" + e.name + "' must be numeric");
          return std::nullopt;
        }
        ts.push_back(*t);
      }
      const bool all_int = std::all_of(ts.begin(), ts.end(), [](Type t) { return t == Type::Int; });
      if (e.name == "min" || e.name == "max") {
        if (ts.size() < 2) {
          error(e.pos, "'" + e.name + "' needs at least two arguments");
          return std::nullopt;
        }
        return all_int ? Type::Int : Type::Real;
      }
      if (e.name == "floor" || e.name == "ceil" || e.name == "abs") {
        if (ts.size() != 1) {
          error(e.pos, "'" + e.name + "' takes one argument");
          return std::nullopt;
        }
        if (e.name == "abs") return ts[0];
        return Type::Int;
      }
      error(e.pos, "unknown function '" + e.name + "'");
      return std::nullopt;
    }
  }
  return std::nullopt;
}

bool Scope::variable_free(const Expr& e) const {
  if (e.kind == Expr::Kind::Name) {
    if (constant(e.name)) return true;
    if (variable(e.name)) error(e.pos, "state variable '" + e.name + "' not allowed here (constant expression expected)");
    return false;
  }
  for (const auto& a : e.args)
    if (!variable_free(a)) return false;
  return true;
}

double Scope::evaluate(const Expr& e) const { return eval_rec(e, nullptr).value_or(0.0); }

std::optional<double> Scope::eval_rec(const Expr& e, const std::vector<double>* vars) const {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Number: return e.number;
    case K::Boolean: return e.boolean ? 1.0 : 0.0;
    case K::Name:
      if (const auto* c = constant(e.name)) return c->value;
      if (const auto* v = variable(e.name); v && vars) return (*vars)[v->index];
      return std::nullopt;
    case K::Unary: {
      const auto a = eval_rec(e.args[0], vars);
      if (!a) return a;
      return e.name == "!" ? (*a == 0.0 ? 1.0 : 0.0) : -*a;
    }
    case K::Binary: {
      const auto a = eval_rec(e.args[0], vars);
      const auto b = eval_rec(e.args[1], vars);
      if (!a || !b) return std::nullopt;
      return apply_binary(e.name, *a, *b);
    }
    case K::Ternary: {
      const auto c = eval_rec(e.args[0], vars);
      if (!c) return c;
      return eval_rec(e.args[*c != 0.0 ? 1 : 2], vars);
    }
    case K::Call: {
      std::vector<double> xs;
      for (const auto& a : e.args) {
        const auto x = eval_rec(a, vars);
        if (!x) return x;
        xs.push_back(*x);
      }
      return apply_call(e.name, xs.data(), xs.size());
    }
  }
  return std::nullopt;
}

}  // namespace detail

void check(const NetworkModel& model) {
  std::vector<Diagnostic> diags;
  if (model.processes.empty()) {
    diags.push_back({1, 1, "no processes"});
    throw ParseError(std::move(diags));
  }
  detail::Scope scope(model, diags);

  std::set<std::string> process_names;
  for (const auto& p : model.processes)
    if (!process_names.insert(p.name).second) diags.push_back({p.pos.line, p.pos.column, "duplicate process '" + p.name + "'"});

  auto err = [&](SourcePos pos, std::string msg) { diags.push_back({pos.line, pos.column, std::move(msg)}); };

  for (const auto& r : model.rewards) {
    if (!r.rate) continue;
    const auto t = scope.type_of(*r.rate);
    if (t && !detail::numeric(*t)) err(r.rate->pos, "rate reward of '" + r.name + "' must be numeric");
  }

  for (std::size_t p = 0; p < model.processes.size(); ++p) {
    for (const auto& c : model.processes[p].commands) {
      if (c.action == "tau") err(c.pos, "'tau' is reserved; write [] for the internal action");
      if (const auto t = scope.type_of(c.guard); t && *t != Type::Bool) err(c.guard.pos, "guard must be boolean");
      if (c.kind == Command::Kind::Markovian) {
        if (const auto t = scope.type_of(c.rate); t && !detail::numeric(*t)) err(c.rate.pos, "rate must be numeric");
      }
      double weight_sum = 0.0;
      bool weights_ok = true;
      for (const auto& b : c.branches) {
        const auto wt = scope.type_of(b.weight);
        if (!wt || !detail::numeric(*wt) || !scope.variable_free(b.weight)) {
          if (wt && !detail::numeric(*wt)) err(b.weight.pos, "branch weight must be numeric");
          weights_ok = false;
        } else {
          const double w = scope.evaluate(b.weight);
          if (!(w >= 0.0)) err(b.weight.pos, "branch weight must be non-negative"), weights_ok = false;
          weight_sum += w;
        }
        std::set<std::string> assigned;
        for (const auto& a : b.update) {
          if (!assigned.insert(a.target).second) err(a.pos, "'" + a.target + "' assigned twice in one update");
          const auto vt = scope.type_of(a.value);
          if (scope.is_reward(a.target)) {
            if (vt && !detail::numeric(*vt)) err(a.value.pos, "reward assignment must be numeric");
            continue;
          }
          const auto* v = scope.variable(a.target);
          if (!v) {
            if (!scope.constant(a.target)) err(a.pos, "assignment to undeclared variable '" + a.target + "'");
            else err(a.pos, "cannot assign to constant '" + a.target + "'");
            continue;
          }
          if (v->process != p)
            err(a.pos, "process '" + model.processes[p].name + "' cannot assign variable '" + a.target + "' of process '" +
                           model.processes[v->process].name + "'");
          if (!vt) continue;
          if (v->type == Type::Bool && *vt != Type::Bool) err(a.value.pos, "boolean '" + a.target + "' assigned a numeric value");
          if (v->type == Type::Int && *vt == Type::Bool) err(a.value.pos, "integer '" + a.target + "' assigned a boolean");
          if (v->type == Type::Int && *vt == Type::Real)
            err(a.value.pos, "real-valued expression assigned to integer '" + a.target + "'");
        }
      }
      if (weights_ok && !(weight_sum > 0.0)) err(c.pos, "branch weights must have a positive sum");
    }
  }

  if (model.property) {
    const auto& prop = *model.property;
    if (!scope.is_reward(prop.reward)) err(prop.pos, "property refers to undeclared reward '" + prop.reward + "'");
    const auto t = scope.type_of(prop.bound);
    if (t && (!detail::numeric(*t) || !scope.variable_free(prop.bound))) {
      err(prop.bound.pos, "time bound must be a numeric constant expression");
    } else if (t && !(scope.evaluate(prop.bound) >= 0.0)) {
      err(prop.bound.pos, "time bound must be non-negative");
    }
  }

  if (!diags.empty()) throw ParseError(std::move(diags));
}

double evaluate_constant(const NetworkModel& model, const Expr& e) {
  std::vector<Diagnostic> diags;
  detail::Scope scope(model, diags);
  const auto t = scope.type_of(e);
  if (t && !scope.variable_free(e)) diags.push_back({e.pos.line, e.pos.column, "constant expression expected"});
  if (!diags.empty()) throw ParseError(std::move(diags));
  return scope.evaluate(e);
}

std::optional<Query> declared_query(const NetworkModel& model) {
  if (!model.property) return std::nullopt;
  return Query{model.property->direction, evaluate_constant(model, model.property->bound), model.property->reward};
}

// ---------------------------------------------------------------- printer

namespace {

int precedence_of(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Ternary: return 0;
    case K::Binary: {
      const auto& op = e.name;
      if (op == "||") return 1;
      if (op == "&&") return 2;
      if (op == "==" || op == "!=") return 3;
      if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
      if (op == "+" || op == "-") return 5;
      return 6;
    }
    case K::Unary: return 7;
    default: return 8;
  }
}

std::string number_text(double v, bool integral) {
  char buf[64];
  if (integral && std::abs(v) < 9.0e15) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
    return std::string(buf, end);
  }
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

void print_expr(std::ostream& out, const Expr& e, int min_prec) {
  const int prec = precedence_of(e);
  const bool parens = prec < min_prec;
  if (parens) out << '(';
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Number: out << number_text(e.number, e.integral); break;
    case K::Boolean: out << (e.boolean ? "true" : "false"); break;
    case K::Name: out << e.name; break;
    case K::Unary:
      out << e.name;
      print_expr(out, e.args[0], 7);
      break;
    case K::Binary:
      print_expr(out, e.args[0], prec);
      out << ' ' << e.name << ' ';
      print_expr(out, e.args[1], prec + 1);
      break;
    case K::Ternary:
      print_expr(out, e.args[0], 1);
      out << " ? ";
      print_expr(out, e.args[1], 0);
      out << " : ";
      print_expr(out, e.args[2], 0);
      break;
    case K::Call:
      out << e.name << '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out << ", ";
        print_expr(out, e.args[i], 0);
      }
      out << ')';
      break;
  }
  if (parens) out << ')';
}

void print_update(std::ostream& out, const std::vector<Assignment>& update) {
  if (update.empty()) {
    out << "true";
    return;
  }
  for (std::size_t i = 0; i < update.size(); ++i) {
    if (i) out << " & ";
    out << '(' << update[i].target << "' = ";
    print_expr(out, update[i].value, 0);
    out << ')';
  }
}

bool is_unit_weight(const Expr& w) { return w.kind == Expr::Kind::Number && w.integral && w.number == 1.0; }

}  // namespace

std::string print(const Expr& e) {
  std::ostringstream out;
  print_expr(out, e, 0);
  return out.str();
}

std::string print(const NetworkModel& model) {
  std::ostringstream out;
  for (const auto& c : model.constants) {
    out << "const " << to_string(c.type) << ' ' << c.name << " = ";
    print_expr(out, c.value, 0);
    out << ";\n";
  }
  for (const auto& r : model.rewards) {
    out << "reward " << r.name;
    if (r.rate) {
      out << " = ";
      print_expr(out, *r.rate, 0);
    }
    out << ";\n";
  }
  for (const auto& p : model.processes) {
    out << "\nprocess " << p.name << " {\n";
    for (const auto& v : p.variables) {
      out << "  " << (v.observable ? "observable " : "") << v.name << " : ";
      if (v.type == Type::Bool) {
        out << "bool";
      } else {
        out << '[';
        print_expr(out, v.lower, 0);
        out << "..";
        print_expr(out, v.upper, 0);
        out << ']';
      }
      out << " init ";
      print_expr(out, v.init, 0);
      out << ";\n";
    }
    for (const auto& c : p.commands) {
      out << "  ";
      if (c.kind == Command::Kind::Markovian) {
        out << "rate(";
        print_expr(out, c.rate, 0);
        out << ") ";
      } else {
        out << '[' << c.action << "] ";
      }
      print_expr(out, c.guard, 0);
      out << " -> ";
      if (c.kind == Command::Kind::Markovian || (c.branches.size() == 1 && is_unit_weight(c.branches[0].weight))) {
        print_update(out, c.branches[0].update);
      } else {
        for (std::size_t i = 0; i < c.branches.size(); ++i) {
          if (i) out << " + ";
          print_expr(out, c.branches[i].weight, 1);
          out << " : ";
          print_update(out, c.branches[i].update);
        }
      }
      out << ";\n";
    }
    out << "}\n";
  }
  if (model.property) {
    out << "\nproperty " << (model.property->direction == Direction::Max ? "Xmax" : "Xmin") << "[T == ";
    print_expr(out, model.property->bound, 0);
    out << "](S(" << model.property->reward << "));\n";
  }
  return out.str();
}

}  // namespace masched::dsl
