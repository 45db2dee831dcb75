#pragma once

#include "masched/dsl.hpp"
#include "masched/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace masched {

namespace detail {

// Stack-machine form of a checked expression, evaluated over a valuation.
class Code {
 public:
  enum class Op : std::uint8_t {
    Const, Var, Neg, Not, Add, Sub, Mul, Div, Mod,
    Lt, Le, Gt, Ge, Eq, Ne, And, Or, Select, Min, Max, Floor, Ceil, Abs,
  };
  struct Instr {
    Op op;
    std::uint32_t arg = 0;  // Var: variable index; Min/Max: argument count
    double value = 0.0;     // Const
  };

  static constexpr std::size_t kMaxStack = 64;

  Code() : program_{{Op::Const, 0, 0.0}} {}
  explicit Code(std::vector<Instr> program);

  double eval(const Value* vars) const noexcept;
  bool constant() const noexcept { return program_.size() == 1 && program_[0].op == Op::Const; }
  double constant_value() const noexcept { return program_[0].value; }

 private:
  std::vector<Instr> program_;
};

}  // namespace detail

// A checked NetworkModel compiled for simulation: processes composed on the fly with
// multi-way synchronisation on shared labels, maximal progress, and the branch and
// rate rewards of one selected reward structure.
class Network final : public Model {
 public:
  Network(const dsl::NetworkModel& model, const std::string& reward);

  const std::vector<std::string>& variables() const override { return var_names_; }
  const std::vector<std::string>& actions() const override { return labels_; }
  std::vector<std::size_t> observable_variables() const override { return observable_; }
  State initial_state() const override;
  void enabled(const State& s, Enabled& out) const override;
  double take(State& s, const Enabled& e, std::size_t transition, std::size_t branch) const override;
  double rate_reward(const State& s) const override;

  const std::string& reward() const noexcept { return reward_; }
  // Bounds of variable i.
  Value lower(std::size_t i) const { return vars_.at(i).lower; }
  Value upper(std::size_t i) const { return vars_.at(i).upper; }
  // Index of a variable by name, or variables().size().
  std::size_t variable_index(const std::string& name) const;

 private:
  struct Var {
    Value lower;
    Value upper;
    Value init;
    bool boolean;
  };
  struct Update {
    std::uint32_t var;
    detail::Code value;
  };
  struct CompiledBranch {
    double probability;
    std::vector<Update> updates;
    std::vector<detail::Code> rewards;
  };
  struct CompiledCommand {
    bool markovian;
    std::uint32_t label;  // index into labels_
    std::uint32_t process;
    detail::Code guard;
    detail::Code rate;
    std::vector<CompiledBranch> branches;
  };
  struct Sync {
    bool internal;
    // participants[i]: commands of one process carrying this label
    std::vector<std::vector<std::uint32_t>> participants;
  };

  std::vector<std::string> var_names_;
  std::vector<Var> vars_;
  std::vector<std::size_t> observable_;
  std::vector<std::string> labels_;
  std::vector<CompiledCommand> commands_;
  std::vector<std::uint32_t> markovian_;
  std::vector<std::uint32_t> probabilistic_;
  std::vector<Sync> syncs_;  // indexed by label
  std::string reward_;
  detail::Code rate_reward_;
};

// Parses, checks and compiles a `.man` file. An empty `reward` selects the reward
// named by the file's property (ModelError if there is none).
Network load_network(const dsl::NetworkModel& model, std::string reward = {});

}  // namespace masched
