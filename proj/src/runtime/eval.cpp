#include <algorithm>
#include <cmath>
#include <sstream>

#include "tr/lang/parser.hpp"
#include "tr/runtime/machine.hpp"

namespace tr::runtime {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::UnknownEntry: return "UnknownEntry";
        case ErrorKind::ArityMismatch: return "ArityMismatch";
        case ErrorKind::NoApplicableRule: return "NoApplicableRule";
        case ErrorKind::RecursionLimit: return "RecursionLimit";
        case ErrorKind::EnvError: return "EnvError";
        case ErrorKind::TypeError: return "TypeError";
        case ErrorKind::NotStarted: return "NotStarted";
    }
    return "Unknown";
}

RuntimeError::RuntimeError(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

const char* kind_name(const Value& v) {
    switch (v.index()) {
        case 0: return "Bool";
        case 1: return "Real";
        case 2: return "Angle";
        case 3: return "Point";
        default: return "ObjectRef";
    }
}

std::string to_string(const Value& v) {
    using lang::format_number;
    return std::visit(
        [](const auto& x) -> std::string {
            using X = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<X, bool>) {
                return x ? "true" : "false";
            } else if constexpr (std::is_same_v<X, double>) {
                return format_number(x);
            } else if constexpr (std::is_same_v<X, Angle>) {
                return format_number(x.radians) + "rad";
            } else if constexpr (std::is_same_v<X, Vec2>) {
                return "point(" + format_number(x.x) + ", " + format_number(x.y) + ")";
            } else {
                return "\"" + x.id + "\"";
            }
        },
        v);
}

std::string to_string(const ActionCommand& c) {
    if (c.is_nil()) return "nil";
    std::string out = c.name;
    if (!c.args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < c.args.size(); ++i) {
            if (i) out += ", ";
            out += to_string(c.args[i]);
        }
        out += ')';
    }
    return out;
}

std::string LevelTrace::truth_string() const {
    std::string s;
    s.reserve(truth.size());
    for (Truth t : truth) s += static_cast<char>(t);
    return s;
}

namespace {

[[noreturn]] void type_error(const lang::Expr& e, const std::string& message) {
    throw RuntimeError(ErrorKind::TypeError, message + " in '" + lang::pretty(e) + "'");
}

class Evaluator {
  public:
    Evaluator(const EvalScope& scope, EnvProvider& env) : scope_(scope), env_(env) {}

    Value eval(const lang::Expr& e) {
        return std::visit([&](const auto& n) { return eval_node(e, n); }, e.node);
    }

    bool truth(const lang::Expr& e) {
        Value v = eval(e);
        if (const bool* b = std::get_if<bool>(&v)) return *b;
        type_error(e, std::string("condition must be Bool, got ") + kind_name(v));
    }

  private:
    const EvalScope& scope_;
    EnvProvider& env_;

    template <typename Key>
    bool hysteretic(std::unordered_map<Key, bool>* state, const Key& key, double measure,
                    const lang::Tolerance& band) {
        std::optional<bool> previous;
        if (state) {
            if (auto it = state->find(key); it != state->end()) previous = it->second;
        }
        bool now = schmitt(previous, measure, band);
        if (state) (*state)[key] = now;
        return now;
    }

    Value sensed(const std::string& name, const std::vector<Value>& args) {
        Sensed s = env_.resolve(name, args);
        if (auto* g = std::get_if<Graded>(&s)) {
            std::string key = name;
            for (const auto& a : args) key += '|' + to_string(a);
            return hysteretic(scope_.state ? &scope_.state->sensors : nullptr, key, g->measure, g->band);
        }
        return std::get<Value>(std::move(s));
    }

    Value eval_node(const lang::Expr&, const lang::expr::True&) { return true; }
    Value eval_node(const lang::Expr&, const lang::expr::Number& n) { return n.value; }
    Value eval_node(const lang::Expr&, const lang::expr::Angle& n) { return Angle{n.radians}; }
    Value eval_node(const lang::Expr&, const lang::expr::Point& n) { return Vec2{n.x, n.y}; }
    Value eval_node(const lang::Expr&, const lang::expr::Str& n) { return ObjectRef{n.text}; }

    Value eval_node(const lang::Expr&, const lang::expr::Var& n) {
        if (scope_.params) {
            const auto& ps = *scope_.params;
            auto it = std::find(ps.begin(), ps.end(), n.name);
            if (it != ps.end()) return scope_.bindings->at(static_cast<std::size_t>(it - ps.begin()));
        }
        return sensed(n.name, {});
    }

    Value eval_node(const lang::Expr& e, const lang::expr::Call& n) {
        std::vector<Value> args;
        args.reserve(n.args.size());
        for (const auto& a : n.args) args.push_back(eval(*a));
        if (n.name == "point") {
            const double* x = args.size() == 2 ? std::get_if<double>(&args[0]) : nullptr;
            const double* y = args.size() == 2 ? std::get_if<double>(&args[1]) : nullptr;
            if (!x || !y) type_error(e, "point() takes two Real arguments");
            return Vec2{*x, *y};
        }
        return sensed(n.name, args);
    }

    Value eval_node(const lang::Expr&, const lang::expr::Not& n) { return !truth(*n.operand); }

    Value eval_node(const lang::Expr&, const lang::expr::And& n) {
        for (const auto& o : n.operands) {
            if (!truth(*o)) return false;
        }
        return true;
    }

    Value eval_node(const lang::Expr&, const lang::expr::Or& n) {
        for (const auto& o : n.operands) {
            if (truth(*o)) return true;
        }
        return false;
    }

    Value eval_node(const lang::Expr& e, const lang::expr::Near& n) {
        Value a = eval(*n.a);
        Value b = eval(*n.b);
        const NearDefaults defaults = scope_.tolerances ? *scope_.tolerances : NearDefaults{};
        double measure = 0.0;
        lang::Tolerance band;
        if (a.index() != b.index()) {
            type_error(e, std::string("cannot compare ") + kind_name(a) + " with " + kind_name(b));
        }
        if (auto* x = std::get_if<double>(&a)) {
            measure = std::abs(*x - std::get<double>(b));
            band = defaults.scalar;
        } else if (auto* x = std::get_if<Angle>(&a)) {
            measure = std::abs(lang::normalize_angle(x->radians - std::get<Angle>(b).radians));
            band = defaults.angle;
        } else if (auto* x = std::get_if<Vec2>(&a)) {
            measure = distance(*x, std::get<Vec2>(b));
            band = defaults.point;
        } else {
            type_error(e, std::string("cannot measure closeness of ") + kind_name(a));
        }
        const lang::Expr* node = &e;
        return hysteretic(scope_.state ? &scope_.state->nodes : nullptr, node, measure, n.tolerance.value_or(band));
    }
};

}  // namespace

Value eval_expr(const lang::Expr& e, const EvalScope& scope, EnvProvider& env) {
    return Evaluator(scope, env).eval(e);
}

bool eval_condition(const lang::Expr& e, const EvalScope& scope, EnvProvider& env) {
    return Evaluator(scope, env).truth(e);
}

}  // namespace tr::runtime
