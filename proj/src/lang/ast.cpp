#include "tr/lang/ast.hpp"

#include <cmath>
#include <numbers>

namespace tr::lang {

const TreeNode* TRTree::find(const std::string& id) const {
    for (const auto& node : nodes) {
        if (node.id == id) return &node;
    }
    return nullptr;
}

const TRProgram* ProgramLibrary::find_program(const std::string& name) const {
    auto it = programs.find(name);
    return it == programs.end() ? nullptr : &it->second;
}

const TRTree* ProgramLibrary::find_tree(const std::string& name) const {
    auto it = trees.find(name);
    return it == trees.end() ? nullptr : &it->second;
}

const std::vector<std::string>* ProgramLibrary::params_of(const std::string& name) const {
    if (const auto* p = find_program(name)) return &p->params;
    if (const auto* t = find_tree(name)) return &t->params;
    return nullptr;
}

void ProgramLibrary::declare_primitive(const std::string& name, std::size_t arity) {
    primitive_decls[name] = Declaration{arity, {}};
}

void ProgramLibrary::declare_env(const std::string& name, std::size_t arity) {
    env_decls[name] = Declaration{arity, {}};
}

namespace {

bool equal_lists(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!structurally_equal(a[i], b[i])) return false;
    }
    return true;
}

struct NodeEqual {
    const Expr::Node& other;

    bool operator()(const expr::True&) const { return true; }
    bool operator()(const expr::Number& n) const {
        return std::get<expr::Number>(other).value == n.value;
    }
    bool operator()(const expr::Angle& n) const {
        return std::get<expr::Angle>(other).radians == n.radians;
    }
    bool operator()(const expr::Point& n) const {
        const auto& o = std::get<expr::Point>(other);
        return o.x == n.x && o.y == n.y;
    }
    bool operator()(const expr::Str& n) const { return std::get<expr::Str>(other).text == n.text; }
    bool operator()(const expr::Var& n) const { return std::get<expr::Var>(other).name == n.name; }
    bool operator()(const expr::Call& n) const {
        const auto& o = std::get<expr::Call>(other);
        return o.name == n.name && equal_lists(o.args, n.args);
    }
    bool operator()(const expr::Not& n) const {
        return structurally_equal(std::get<expr::Not>(other).operand, n.operand);
    }
    bool operator()(const expr::And& n) const {
        return equal_lists(std::get<expr::And>(other).operands, n.operands);
    }
    bool operator()(const expr::Or& n) const {
        return equal_lists(std::get<expr::Or>(other).operands, n.operands);
    }
    bool operator()(const expr::Near& n) const {
        const auto& o = std::get<expr::Near>(other);
        return structurally_equal(o.a, n.a) && structurally_equal(o.b, n.b) &&
               o.tolerance == n.tolerance;
    }
};

bool equal_optional_action(const std::optional<ActionTerm>& a, const std::optional<ActionTerm>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || structurally_equal(*a, *b);
}

template <typename Map, typename Eq>
bool equal_maps(const Map& a, const Map& b, Eq eq) {
    if (a.size() != b.size()) return false;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
        if (ia->first != ib->first || !eq(ia->second, ib->second)) return false;
    }
    return true;
}

}  // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(NodeEqual{b.node}, a.node);
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return structurally_equal(*a, *b);
}

bool structurally_equal(const ActionTerm& a, const ActionTerm& b) {
    return a.kind == b.kind && a.name == b.name && equal_lists(a.args, b.args);
}

bool structurally_equal(const TRProgram& a, const TRProgram& b) {
    if (a.name != b.name || a.params != b.params || a.rules.size() != b.rules.size()) return false;
    for (std::size_t i = 0; i < a.rules.size(); ++i) {
        if (!structurally_equal(a.rules[i].condition, b.rules[i].condition) ||
            !structurally_equal(a.rules[i].action, b.rules[i].action)) {
            return false;
        }
    }
    return true;
}

bool structurally_equal(const TRTree& a, const TRTree& b) {
    if (a.name != b.name || a.params != b.params || a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const auto& x = a.nodes[i];
        const auto& y = b.nodes[i];
        if (x.id != y.id || x.parent != y.parent || x.arc_cost != y.arc_cost ||
            x.decl_index != y.decl_index || !structurally_equal(x.condition, y.condition) ||
            !equal_optional_action(x.action_to_parent, y.action_to_parent)) {
            return false;
        }
    }
    return true;
}

bool structurally_equal(const ProgramLibrary& a, const ProgramLibrary& b) {
    auto same_decl = [](const Declaration& x, const Declaration& y) { return x.arity == y.arity; };
    auto same_prog = [](const TRProgram& x, const TRProgram& y) { return structurally_equal(x, y); };
    auto same_tree = [](const TRTree& x, const TRTree& y) { return structurally_equal(x, y); };
    return a.order == b.order && equal_maps(a.programs, b.programs, same_prog) &&
           equal_maps(a.trees, b.trees, same_tree) &&
           equal_maps(a.primitive_decls, b.primitive_decls, same_decl) &&
           equal_maps(a.env_decls, b.env_decls, same_decl);
}

double normalize_angle(double radians) {
    double r = std::remainder(radians, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

}  // namespace tr::lang
