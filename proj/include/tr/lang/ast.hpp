#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tr::lang {

/// Byte range in the original source plus 1-based line/column of its start.
struct SourceSpan {
    std::size_t offset = 0;
    std::size_t length = 0;
    std::size_t line = 0;
    std::size_t column = 0;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Enter/exit thresholds of a two-threshold comparison.
struct Tolerance {
    double enter = 0.0;
    double exit = 0.0;
    bool operator==(const Tolerance&) const = default;
};

namespace expr {
struct True {};
struct Number { double value; };
/// Radians, normalized to (-pi, pi].
struct Angle { double radians; };
struct Point { double x; double y; };
/// Quoted object reference, e.g. "A".
struct Str { std::string text; };
struct Var { std::string name; };
struct Call { std::string name; std::vector<ExprPtr> args; };
struct Not { ExprPtr operand; };
struct And { std::vector<ExprPtr> operands; };
struct Or { std::vector<ExprPtr> operands; };
/// Hysteretic closeness test. An empty tolerance means "use the runtime's
/// default for the operands' value kind" (this is what `equal` and `==` produce).
struct Near { ExprPtr a; ExprPtr b; std::optional<Tolerance> tolerance; };
}  // namespace expr

struct Expr {
    using Node = std::variant<expr::True, expr::Number, expr::Angle, expr::Point, expr::Str,
                              expr::Var, expr::Call, expr::Not, expr::And, expr::Or, expr::Near>;
    Node node;
    SourceSpan span;
};

template <typename T>
ExprPtr make_expr(T node, SourceSpan span = {}) {
    return std::make_shared<const Expr>(Expr{Expr::Node{std::move(node)}, span});
}

struct ActionTerm {
    enum class Kind { Nil, Primitive, ProgramCall };
    Kind kind = Kind::Nil;
    std::string name;
    std::vector<ExprPtr> args;
    SourceSpan span;

    static ActionTerm nil() { return {}; }
    bool is_nil() const { return kind == Kind::Nil; }
};

struct Rule {
    ExprPtr condition;
    ActionTerm action;
    SourceSpan span;
};

struct TRProgram {
    std::string name;
    std::vector<std::string> params;
    std::vector<Rule> rules;
    SourceSpan span;
};

inline constexpr const char* kRootId = "root";

struct TreeNode {
    std::string id;
    ExprPtr condition;
    std::string parent;  // empty for the root
    std::optional<ActionTerm> action_to_parent;
    double arc_cost = 1.0;
    std::size_t decl_index = 0;
    SourceSpan span;

    bool is_root() const { return parent.empty(); }
};

struct TRTree {
    std::string name;
    std::vector<std::string> params;
    std::vector<TreeNode> nodes;  // declaration order
    SourceSpan span;

    const TreeNode* find(const std::string& id) const;
};

struct Declaration {
    std::size_t arity = 0;
    SourceSpan span;
};

struct ProgramLibrary {
    std::map<std::string, TRProgram> programs;
    std::map<std::string, TRTree> trees;
    std::map<std::string, Declaration> primitive_decls;
    std::map<std::string, Declaration> env_decls;
    /// Program and tree names in source order; pretty() follows it.
    std::vector<std::string> order;

    const TRProgram* find_program(const std::string& name) const;
    const TRTree* find_tree(const std::string& name) const;
    bool has_callable(const std::string& name) const {
        return programs.count(name) != 0 || trees.count(name) != 0;
    }
    /// Parameter list of a program or tree, nullptr when unknown.
    const std::vector<std::string>* params_of(const std::string& name) const;

    void declare_primitive(const std::string& name, std::size_t arity);
    void declare_env(const std::string& name, std::size_t arity);
};

// Structural equality ignores source spans.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const ExprPtr& a, const ExprPtr& b);
bool structurally_equal(const ActionTerm& a, const ActionTerm& b);
bool structurally_equal(const TRProgram& a, const TRProgram& b);
bool structurally_equal(const TRTree& a, const TRTree& b);
bool structurally_equal(const ProgramLibrary& a, const ProgramLibrary& b);

/// Normalize an angle in radians to (-pi, pi].
double normalize_angle(double radians);

}  // namespace tr::lang
