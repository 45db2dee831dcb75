#pragma once

#include "masched/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Abstract syntax of the `.man` guarded-command network language (docs/grammar.md).
namespace masched::dsl {

enum class Type { Bool, Int, Real };

std::string_view to_string(Type t);

// Positions are carried for diagnostics only; they never take part in equality,
// so a model and its pretty-printed reparse compare equal.
struct SourcePos {
  int line = 0;
  int column = 0;
  friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

struct Expr {
  enum class Kind { Number, Boolean, Name, Unary, Binary, Ternary, Call };

  Kind kind = Kind::Number;
  double number = 0.0;
  bool integral = true;  // Number: written without fraction/exponent
  bool boolean = false;  // Boolean literal value
  std::string name;      // Name, Call function, or Unary/Binary operator
  std::vector<Expr> args;
  SourcePos pos;

  static Expr make_number(double v, bool integral, SourcePos pos = {});
  static Expr make_bool(bool v, SourcePos pos = {});
  static Expr make_name(std::string n, SourcePos pos = {});

  friend bool operator==(const Expr&, const Expr&) = default;
};

struct ConstDecl {
  std::string name;
  Type type = Type::Int;
  Expr value;
  SourcePos pos;
  friend bool operator==(const ConstDecl&, const ConstDecl&) = default;
};

// A reward structure: optional rate-reward expression plus branch rewards given by
// transient assignments `(name' = e)` inside updates. Never part of the state.
struct RewardDecl {
  std::string name;
  std::optional<Expr> rate;
  SourcePos pos;
  friend bool operator==(const RewardDecl&, const RewardDecl&) = default;
};

struct VarDecl {
  std::string name;
  bool observable = false;
  Type type = Type::Int;  // Bool or Int
  Expr lower;
  Expr upper;
  Expr init;
  SourcePos pos;
  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

struct Assignment {
  std::string target;
  Expr value;
  SourcePos pos;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Branch {
  Expr weight;
  std::vector<Assignment> update;
  friend bool operator==(const Branch&, const Branch&) = default;
};

struct Command {
  enum class Kind { Probabilistic, Markovian };

  Kind kind = Kind::Probabilistic;
  std::string action;  // empty: internal non-synchronising action
  Expr rate;           // Markovian only
  Expr guard;
  std::vector<Branch> branches;  // Markovian: exactly one, weight 1
  SourcePos pos;
  friend bool operator==(const Command&, const Command&) = default;
};

struct Process {
  std::string name;
  std::vector<VarDecl> variables;
  std::vector<Command> commands;
  SourcePos pos;
  friend bool operator==(const Process&, const Process&) = default;
};

struct PropertyDecl {
  Direction direction = Direction::Max;
  Expr bound;
  std::string reward;
  SourcePos pos;
  friend bool operator==(const PropertyDecl&, const PropertyDecl&) = default;
};

struct NetworkModel {
  std::vector<ConstDecl> constants;
  std::vector<RewardDecl> rewards;
  std::vector<Process> processes;
  std::optional<PropertyDecl> property;
  friend bool operator==(const NetworkModel&, const NetworkModel&) = default;
};

// Syntax only; throws ParseError with line/column diagnostics.
NetworkModel parse_syntax(std::string_view text);

// Declaration, typing and bound checks; throws ParseError listing every problem found.
void check(const NetworkModel& model);

// parse_syntax + check.
NetworkModel parse(std::string_view text);
NetworkModel parse_file(const std::string& path);

// Deterministic pretty-printer; parse(print(m)) == m.
std::string print(const NetworkModel& model);
std::string print(const Expr& e);

// Evaluates a variable-free expression using the model's constants.
double evaluate_constant(const NetworkModel& model, const Expr& e);

// The property declared in the file, with its bound evaluated.
std::optional<Query> declared_query(const NetworkModel& model);

}  // namespace masched::dsl
