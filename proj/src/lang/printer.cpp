#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tr/lang/parser.hpp"

namespace tr::lang {

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {

std::string quote(const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

/// Degrees when the degree text reads back to the same radians, else radians.
std::string format_angle(double radians) {
    std::string deg = format_number(radians * 180.0 / std::numbers::pi);
    double back = 0.0;
    std::from_chars(deg.data(), deg.data() + deg.size(), back);
    if (normalize_angle(back * std::numbers::pi / 180.0) == radians) return deg + "deg";
    return format_number(radians) + "rad";
}

void print(std::ostream& out, const Expr& e);

void print_list(std::ostream& out, const std::vector<ExprPtr>& args) {
    out << '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out << ", ";
        print(out, *args[i]);
    }
    out << ')';
}

/// Operands of `and`/`or`/`not` that would re-associate without parentheses.
bool needs_parens(const Expr& e) {
    return std::holds_alternative<expr::And>(e.node) || std::holds_alternative<expr::Or>(e.node);
}

void print_operand(std::ostream& out, const Expr& e) {
    if (needs_parens(e)) {
        out << '(';
        print(out, e);
        out << ')';
    } else {
        print(out, e);
    }
}

void print_junction(std::ostream& out, const std::vector<ExprPtr>& ops, const char* word) {
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i) out << ' ' << word << ' ';
        print_operand(out, *ops[i]);
    }
}

void print(std::ostream& out, const Expr& e) {
    std::visit(
        [&](const auto& n) {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, expr::True>) {
                out << 'T';
            } else if constexpr (std::is_same_v<N, expr::Number>) {
                out << format_number(n.value);
            } else if constexpr (std::is_same_v<N, expr::Angle>) {
                out << format_angle(n.radians);
            } else if constexpr (std::is_same_v<N, expr::Point>) {
                out << "point(" << format_number(n.x) << ", " << format_number(n.y) << ')';
            } else if constexpr (std::is_same_v<N, expr::Str>) {
                out << quote(n.text);
            } else if constexpr (std::is_same_v<N, expr::Var>) {
                out << n.name;
            } else if constexpr (std::is_same_v<N, expr::Call>) {
                out << n.name;
                print_list(out, n.args);
            } else if constexpr (std::is_same_v<N, expr::Not>) {
                out << "not ";
                print_operand(out, *n.operand);
            } else if constexpr (std::is_same_v<N, expr::And>) {
                print_junction(out, n.operands, "and");
            } else if constexpr (std::is_same_v<N, expr::Or>) {
                print_junction(out, n.operands, "or");
            } else if constexpr (std::is_same_v<N, expr::Near>) {
                if (n.tolerance) {
                    out << "near(";
                    print(out, *n.a);
                    out << ", ";
                    print(out, *n.b);
                    out << ", " << format_number(n.tolerance->enter) << ", "
                        << format_number(n.tolerance->exit) << ')';
                } else {
                    out << "equal(";
                    print(out, *n.a);
                    out << ", ";
                    print(out, *n.b);
                    out << ')';
                }
            }
        },
        e.node);
}

void print_action(std::ostream& out, const ActionTerm& a) {
    if (a.is_nil()) {
        out << "nil";
        return;
    }
    out << a.name;
    if (!a.args.empty()) print_list(out, a.args);
}

void print_params(std::ostream& out, const std::vector<std::string>& params) {
    out << '(';
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out << ", ";
        out << params[i];
    }
    out << ')';
}

void print_decls(std::ostream& out, const char* keyword, const std::map<std::string, Declaration>& decls) {
    if (decls.empty()) return;
    out << keyword << ' ';
    bool first = true;
    for (const auto& [name, d] : decls) {
        if (!first) out << ", ";
        first = false;
        out << name << '/' << d.arity;
    }
    out << ";\n";
}

}  // namespace

std::string pretty(const Expr& e) {
    std::ostringstream out;
    print(out, e);
    return out.str();
}

std::string pretty(const ActionTerm& action) {
    std::ostringstream out;
    print_action(out, action);
    return out.str();
}

std::string pretty_rule(const Rule& rule) {
    return pretty(*rule.condition) + " -> " + pretty(rule.action);
}

std::string pretty(const ProgramLibrary& lib) {
    std::ostringstream out;
    print_decls(out, "primitive", lib.primitive_decls);
    print_decls(out, "sense", lib.env_decls);
    bool first = lib.primitive_decls.empty() && lib.env_decls.empty();
    for (const auto& name : lib.order) {
        if (!first) out << '\n';
        first = false;
        if (const auto* p = lib.find_program(name)) {
            out << "prog " << p->name;
            print_params(out, p->params);
            out << " {\n";
            for (const auto& r : p->rules) out << "    " << pretty_rule(r) << ";\n";
            out << "}\n";
        } else if (const auto* t = lib.find_tree(name)) {
            out << "tree " << t->name;
            print_params(out, t->params);
            out << " {\n";
            for (const auto& n : t->nodes) {
                if (n.is_root()) {
                    out << "    root: " << pretty(*n.condition) << ";\n";
                    continue;
                }
                out << "    node " << n.id << ": " << pretty(*n.condition) << ", ";
                print_action(out, *n.action_to_parent);
                out << " => " << n.parent;
                if (n.arc_cost != 1.0) out << ", cost " << format_number(n.arc_cost);
                out << ";\n";
            }
            out << "}\n";
        }
    }
    return out.str();
}

}  // namespace tr::lang
