#pragma once

#include "masched/dsl.hpp"
#include "masched/error.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace masched::dsl::detail {

struct ConstInfo {
  Type type = Type::Int;
  double value = 0.0;
};

struct VarInfo {
  std::string name;
  std::size_t index = 0;
  Type type = Type::Int;
  std::size_t process = 0;
  Value lower = 0;
  Value upper = 0;
  Value init = 0;
  bool observable = false;
};

// Name resolution and typing shared by the checker and the compiler. Problems are
// appended to `diags`; callers decide when to throw.
class Scope {
 public:
  Scope(const NetworkModel& model, std::vector<Diagnostic>& diags);

  const ConstInfo* constant(const std::string& name) const;
  const VarInfo* variable(const std::string& name) const;
  bool is_reward(const std::string& name) const;

  const std::vector<VarInfo>& variables() const noexcept { return vars_; }

  // Type of `e`, or nullopt after recording a diagnostic.
  std::optional<Type> type_of(const Expr& e) const;
  bool variable_free(const Expr& e) const;
  // Evaluates a variable-free expression (constants substituted).
  double evaluate(const Expr& e) const;

 private:
  std::optional<double> eval_rec(const Expr& e, const std::vector<double>* vars) const;
  void error(SourcePos pos, std::string message) const { diags_->push_back({pos.line, pos.column, std::move(message)}); }

  std::vector<Diagnostic>* diags_;
  std::unordered_map<std::string, ConstInfo> consts_;
  std::unordered_map<std::string, std::size_t> var_index_;
  std::vector<VarInfo> vars_;
  std::unordered_map<std::string, bool> rewards_;
};

inline bool numeric(Type t) { return t == Type::Int || t == Type::Real; }

// Shared arithmetic so constant folding and runtime evaluation agree bit for bit.
double apply_binary(const std::string& op, double a, double b);
double apply_call(const std::string& fn, const double* args, std::size_t n);

}  // namespace masched::dsl::detail
