#include <algorithm>
#include <set>

#include "tr/lang/parser.hpp"

namespace tr::lang {

namespace {

class Validator {
  public:
    explicit Validator(const ProgramLibrary& lib) : lib_(lib) {}

    Diagnostics run() {
        for (const auto& [_, p] : lib_.programs) program(p);
        for (const auto& [_, t] : lib_.trees) tree(t);
        return std::move(out_);
    }

  private:
    const ProgramLibrary& lib_;
    Diagnostics out_;
    const std::vector<std::string>* scope_ = nullptr;

    void report(DiagnosticKind kind, const SourceSpan& span, std::string message) {
        out_.push_back({kind, span, std::move(message)});
    }

    bool in_scope(const std::string& name) const {
        return scope_ && std::find(scope_->begin(), scope_->end(), name) != scope_->end();
    }

    void program(const TRProgram& p) {
        scope_ = &p.params;
        if (p.rules.empty()) report(DiagnosticKind::ZeroRules, p.span, "program '" + p.name + "' has no rules");
        for (const auto& r : p.rules) {
            expr(*r.condition);
            action(r.action);
        }
    }

    void tree(const TRTree& t) {
        scope_ = &t.params;
        std::size_t roots = 0;
        for (const auto& n : t.nodes) {
            expr(*n.condition);
            if (n.action_to_parent) action(*n.action_to_parent);
            if (n.is_root()) {
                ++roots;
            } else if (n.parent != kRootId && !t.find(n.parent)) {
                report(DiagnosticKind::TreeStructure, n.span, "node '" + n.id + "' has unknown parent '" + n.parent + "'");
            }
            if (n.arc_cost < 0.0) report(DiagnosticKind::TreeStructure, n.span, "arc cost must be >= 0");
        }
        if (roots != 1) {
            report(DiagnosticKind::TreeStructure, t.span, "tree '" + t.name + "' must have exactly one root");
        }
        // Walk each node's parent chain; more steps than nodes means a cycle.
        for (const auto& n : t.nodes) {
            const TreeNode* cur = &n;
            std::size_t steps = 0;
            while (cur && !cur->is_root() && steps <= t.nodes.size()) {
                cur = t.find(cur->parent);
                ++steps;
            }
            if (steps > t.nodes.size()) {
                report(DiagnosticKind::TreeStructure, n.span, "node '" + n.id + "' is on a parent cycle");
            }
        }
    }

    void arity(const std::string& what, const std::string& name, std::size_t expected, std::size_t got,
               const SourceSpan& span) {
        if (expected != got) {
            report(DiagnosticKind::ArityMismatch, span,
                   what + " '" + name + "' takes " + std::to_string(expected) + " argument(s), got " +
                       std::to_string(got));
        }
    }

    void action(const ActionTerm& a) {
        for (const auto& arg : a.args) expr(*arg);
        switch (a.kind) {
            case ActionTerm::Kind::Nil: return;
            case ActionTerm::Kind::ProgramCall:
                if (const auto* params = lib_.params_of(a.name)) {
                    arity("program", a.name, params->size(), a.args.size(), a.span);
                } else {
                    report(DiagnosticKind::UnresolvedName, a.span, "unknown program '" + a.name + "'");
                }
                return;
            case ActionTerm::Kind::Primitive:
                if (auto it = lib_.primitive_decls.find(a.name); it != lib_.primitive_decls.end()) {
                    arity("primitive", a.name, it->second.arity, a.args.size(), a.span);
                } else if (const auto* params = lib_.params_of(a.name)) {
                    arity("program", a.name, params->size(), a.args.size(), a.span);
                } else {
                    report(DiagnosticKind::UnresolvedName, a.span, "unknown action '" + a.name + "'");
                }
                return;
        }
    }

    void expr(const Expr& e) {
        std::visit(
            [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, expr::Var>) {
                    if (in_scope(n.name)) return;
                    auto it = lib_.env_decls.find(n.name);
                    if (it == lib_.env_decls.end()) {
                        report(DiagnosticKind::UnboundVariable, e.span, "unbound variable '" + n.name + "'");
                    } else if (it->second.arity != 0) {
                        arity("symbol", n.name, it->second.arity, 0, e.span);
                    }
                } else if constexpr (std::is_same_v<N, expr::Call>) {
                    for (const auto& a : n.args) expr(*a);
                    if (n.name == "point") {
                        arity("builtin", n.name, 2, n.args.size(), e.span);
                        return;
                    }
                    auto it = lib_.env_decls.find(n.name);
                    if (it == lib_.env_decls.end()) {
                        report(DiagnosticKind::UnresolvedName, e.span, "unknown function '" + n.name + "'");
                    } else {
                        arity("function", n.name, it->second.arity, n.args.size(), e.span);
                    }
                } else if constexpr (std::is_same_v<N, expr::Not>) {
                    expr(*n.operand);
                } else if constexpr (std::is_same_v<N, expr::And> || std::is_same_v<N, expr::Or>) {
                    for (const auto& o : n.operands) expr(*o);
                } else if constexpr (std::is_same_v<N, expr::Near>) {
                    expr(*n.a);
                    expr(*n.b);
                }
            },
            e.node);
    }
};

}  // namespace

Diagnostics validate(const ProgramLibrary& lib) { return Validator(lib).run(); }

}  // namespace tr::lang
