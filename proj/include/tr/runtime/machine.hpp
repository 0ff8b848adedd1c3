#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tr/lang/ast.hpp"
#include "tr/runtime/value.hpp"

namespace tr::runtime {

/// Default bands for `equal(a, b)` keyed by the operands' value kind.
struct NearDefaults {
    lang::Tolerance angle{0.05235987755982988, 0.10471975511965977};  // 3deg / 6deg
    lang::Tolerance point{0.10, 0.20};
    lang::Tolerance scalar{1e-3, 2e-3};
};

struct MachineConfig {
    std::size_t max_depth = 64;
    NearDefaults tolerances;
};

/// Last truth value of every two-threshold comparison in a frame. Near
/// nodes are keyed by AST node identity; graded sensed predicates by symbol
/// and argument values, so one predicate read by several rules behaves as a
/// single comparator.
struct HysteresisState {
    std::unordered_map<const lang::Expr*, bool> nodes;
    std::unordered_map<std::string, bool> sensors;

    bool empty() const { return nodes.empty() && sensors.empty(); }
};

/// Everything eval_expr needs besides the expression itself.
struct EvalScope {
    const std::vector<std::string>* params = nullptr;
    const std::vector<Value>* bindings = nullptr;
    HysteresisState* state = nullptr;
    const NearDefaults* tolerances = nullptr;
};

/// Strict evaluation of `e`. Hysteretic nodes read and update `scope.state`.
Value eval_expr(const lang::Expr& e, const EvalScope& scope, EnvProvider& env);

/// Condition evaluation: like eval_expr but the result must be a Bool.
bool eval_condition(const lang::Expr& e, const EvalScope& scope, EnvProvider& env);

struct ActionCommand {
    std::string name;  // empty for nil
    std::vector<Value> args;

    bool is_nil() const { return name.empty(); }
    bool operator==(const ActionCommand&) const = default;
};

std::string to_string(const ActionCommand& c);

enum class Truth : char { False = '0', True = '1', Unevaluated = '-' };

struct LevelTrace {
    std::string callee;
    std::uint64_t instance_id = 0;
    bool is_tree = false;
    std::size_t selected = 0;  // rule index, or node decl_index for trees
    std::vector<Truth> truth;

    std::string truth_string() const;
    bool operator==(const LevelTrace&) const = default;
};

struct ActivationTrace {
    std::vector<LevelTrace> levels;  // root -> leaf
    ActionCommand leaf;

    std::size_t depth() const { return levels.size(); }
    bool operator==(const ActivationTrace&) const = default;
};

/// Among the true nodes, the one with least cost to the root (sum of arc
/// costs); ties go to the smallest decl_index. nullopt when nothing is true.
std::optional<std::size_t> select_tree_node(const lang::TRTree& tree, const std::vector<bool>& truth);

/// One activation frame: the run-time circuitry of a single called program.
struct Frame {
    std::uint64_t instance_id = 0;
    std::string callee;
    const lang::TRProgram* program = nullptr;
    const lang::TRTree* tree = nullptr;
    std::vector<lang::ExprPtr> arg_exprs;  // evaluated in the parent's scope every tick
    std::optional<std::size_t> selected;
    HysteresisState hysteresis;
    std::vector<Value> bindings;  // this tick's argument values

    const std::vector<std::string>& params() const { return program ? program->params : tree->params; }
};

struct TickResult {
    ActionCommand command;
    ActivationTrace trace;
};

class Machine {
  public:
    /// Checks that `entry` names a program or tree of `lib` with matching arity.
    static Machine init(std::shared_ptr<const lang::ProgramLibrary> lib, lang::ActionTerm entry,
                        MachineConfig config = {});

    /// Re-evaluates the whole activation path from the root and returns the
    /// leaf action. Atomic: on error the machine is left exactly as before.
    TickResult tick(EnvProvider& env);

    /// Trace of the last successful tick; throws NotStarted before the first.
    const ActivationTrace& trace() const;

    /// Rebinds one root argument; descendants see the new value next tick.
    void set_entry_arg(std::size_t index, lang::ExprPtr value);

    std::size_t depth() const { return frames_.size(); }
    std::uint64_t tick_count() const { return tick_count_; }
    const std::vector<Frame>& frames() const { return frames_; }
    const MachineConfig& config() const { return config_; }
    const lang::ProgramLibrary& library() const { return *lib_; }
    const lang::ActionTerm& entry() const { return entry_; }

  private:
    Machine(std::shared_ptr<const lang::ProgramLibrary> lib, lang::ActionTerm entry, MachineConfig config);

    Frame make_frame(const std::string& callee, std::vector<lang::ExprPtr> args);

    std::shared_ptr<const lang::ProgramLibrary> lib_;
    lang::ActionTerm entry_;
    MachineConfig config_;
    std::vector<Frame> frames_;
    HysteresisState entry_hysteresis_;
    std::uint64_t next_instance_id_ = 1;
    std::uint64_t tick_count_ = 0;
    std::optional<ActivationTrace> last_trace_;
};

}  // namespace tr::runtime
