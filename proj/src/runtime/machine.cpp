#include "tr/runtime/machine.hpp"

#include <limits>

namespace tr::runtime {

std::optional<std::size_t> select_tree_node(const lang::TRTree& tree, const std::vector<bool>& truth) {
    std::optional<std::size_t> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (!truth.at(i)) continue;
        double cost = 0.0;
        for (const lang::TreeNode* n = &tree.nodes[i]; !n->is_root(); n = tree.find(n->parent)) {
            cost += n->arc_cost;
        }
        // Nodes are scanned in declaration order, so strict '<' keeps the earliest on ties.
        if (cost < best_cost) {
            best_cost = cost;
            best = i;
        }
    }
    return best;
}

Machine::Machine(std::shared_ptr<const lang::ProgramLibrary> lib, lang::ActionTerm entry, MachineConfig config)
    : lib_(std::move(lib)), entry_(std::move(entry)), config_(config) {}

Machine Machine::init(std::shared_ptr<const lang::ProgramLibrary> lib, lang::ActionTerm entry, MachineConfig config) {
    if (entry.kind == lang::ActionTerm::Kind::Nil || !lib->has_callable(entry.name)) {
        throw RuntimeError(ErrorKind::UnknownEntry, "entry '" + entry.name + "' is not a program or tree");
    }
    const auto& params = *lib->params_of(entry.name);
    if (params.size() != entry.args.size()) {
        throw RuntimeError(ErrorKind::ArityMismatch, "'" + entry.name + "' takes " + std::to_string(params.size()) +
                                                         " argument(s), got " + std::to_string(entry.args.size()));
    }
    if (config.max_depth == 0) throw RuntimeError(ErrorKind::RecursionLimit, "max_depth must be >= 1");
    entry.kind = lang::ActionTerm::Kind::ProgramCall;
    Machine m(std::move(lib), entry, config);
    m.frames_.push_back(m.make_frame(entry.name, entry.args));
    return m;
}

Frame Machine::make_frame(const std::string& callee, std::vector<lang::ExprPtr> args) {
    Frame f;
    f.instance_id = next_instance_id_++;
    f.callee = callee;
    f.program = lib_->find_program(callee);
    f.tree = f.program ? nullptr : lib_->find_tree(callee);
    f.arg_exprs = std::move(args);
    return f;
}

const ActivationTrace& Machine::trace() const {
    if (!last_trace_) throw RuntimeError(ErrorKind::NotStarted, "no tick has been executed");
    return *last_trace_;
}

void Machine::set_entry_arg(std::size_t index, lang::ExprPtr value) {
    if (index >= entry_.args.size()) {
        throw RuntimeError(ErrorKind::ArityMismatch, "entry has no argument " + std::to_string(index));
    }
    entry_.args[index] = value;
    frames_.front().arg_exprs[index] = std::move(value);
}

TickResult Machine::tick(EnvProvider& env) {
    // Work on copies so a failed tick leaves no trace in the machine.
    std::vector<Frame> frames = frames_;
    HysteresisState entry_state = entry_hysteresis_;
    const std::uint64_t saved_next_id = next_instance_id_;

    ActivationTrace trace;
    try {
        for (std::size_t level = 0;; ++level) {
            Frame& f = frames[level];

            EvalScope parent_scope;
            parent_scope.tolerances = &config_.tolerances;
            if (level == 0) {
                parent_scope.state = &entry_state;
            } else {
                const Frame& parent = frames[level - 1];
                parent_scope.params = &parent.params();
                parent_scope.bindings = &parent.bindings;
                parent_scope.state = &frames[level - 1].hysteresis;
            }
            f.bindings.clear();
            for (const auto& a : f.arg_exprs) f.bindings.push_back(eval_expr(*a, parent_scope, env));

            EvalScope scope{&f.params(), &f.bindings, &f.hysteresis, &config_.tolerances};
            LevelTrace lt;
            lt.callee = f.callee;
            lt.instance_id = f.instance_id;

            std::optional<std::size_t> chosen;
            const lang::ActionTerm* action = nullptr;
            static const lang::ActionTerm kNil = lang::ActionTerm::nil();
            if (f.program) {
                const auto& rules = f.program->rules;
                lt.truth.assign(rules.size(), Truth::Unevaluated);
                for (std::size_t i = 0; i < rules.size(); ++i) {
                    bool t = eval_condition(*rules[i].condition, scope, env);
                    lt.truth[i] = t ? Truth::True : Truth::False;
                    if (t) {
                        chosen = i;
                        action = &rules[i].action;
                        break;
                    }
                }
            } else {
                lt.is_tree = true;
                const auto& nodes = f.tree->nodes;
                std::vector<bool> truth(nodes.size());
                for (std::size_t i = 0; i < nodes.size(); ++i) {
                    truth[i] = eval_condition(*nodes[i].condition, scope, env);
                    lt.truth.push_back(truth[i] ? Truth::True : Truth::False);
                }
                chosen = select_tree_node(*f.tree, truth);
                if (chosen) {
                    const auto& n = nodes[*chosen];
                    action = n.action_to_parent ? &*n.action_to_parent : &kNil;
                }
            }
            if (!chosen) {
                throw RuntimeError(ErrorKind::NoApplicableRule,
                                   "no condition of '" + f.callee + "' (instance " +
                                       std::to_string(f.instance_id) + ") is true");
            }
            lt.selected = *chosen;
            trace.levels.push_back(std::move(lt));

            const bool retained = f.selected == chosen;
            f.selected = chosen;
            if (action->kind == lang::ActionTerm::Kind::ProgramCall) {
                if (!retained || frames.size() == level + 1) {
                    frames.resize(level + 1);
                    if (frames.size() >= config_.max_depth) {
                        throw RuntimeError(ErrorKind::RecursionLimit,
                                           "calling '" + action->name + "' would exceed max_depth " +
                                               std::to_string(config_.max_depth));
                    }
                    frames.push_back(make_frame(action->name, action->args));
                }
                continue;
            }
            frames.resize(level + 1);
            ActionCommand cmd;
            if (action->kind == lang::ActionTerm::Kind::Primitive) {
                cmd.name = action->name;
                for (const auto& a : action->args) cmd.args.push_back(eval_expr(*a, scope, env));
            }
            trace.leaf = cmd;
            break;
        }
    } catch (...) {
        next_instance_id_ = saved_next_id;
        throw;
    }

    frames_ = std::move(frames);
    entry_hysteresis_ = std::move(entry_state);
    ++tick_count_;
    last_trace_ = trace;
    return TickResult{trace.leaf, std::move(trace)};
}

}  // namespace tr::runtime
