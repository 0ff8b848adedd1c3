#include "tr/analysis/analysis.hpp"

#include <algorithm>

#include "tr/lang/parser.hpp"

namespace tr::analysis {

const char* to_string(AnalysisErrorKind kind) {
    switch (kind) {
        case AnalysisErrorKind::UnknownFeature: return "UnknownFeature";
        case AnalysisErrorKind::MissingModel: return "MissingModel";
        case AnalysisErrorKind::TooManyFeatures: return "TooManyFeatures";
        case AnalysisErrorKind::NonConjunctive: return "NonConjunctive";
        case AnalysisErrorKind::InvalidModel: return "InvalidModel";
    }
    return "Unknown";
}

AnalysisError::AnalysisError(AnalysisErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

FeatureSet::FeatureSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() > kMaxFeatures) {
        throw AnalysisError(AnalysisErrorKind::TooManyFeatures,
                            std::to_string(names_.size()) + " features, at most " + std::to_string(kMaxFeatures));
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (std::find(names_.begin(), names_.begin() + static_cast<std::ptrdiff_t>(i), names_[i]) !=
            names_.begin() + static_cast<std::ptrdiff_t>(i)) {
            throw AnalysisError(AnalysisErrorKind::InvalidModel, "feature '" + names_[i] + "' listed twice");
        }
    }
}

std::size_t FeatureSet::index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw AnalysisError(AnalysisErrorKind::UnknownFeature, "'" + name + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

std::string to_string(const PropCondition& c, const FeatureSet& f) {
    std::string out;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const std::uint32_t bit = 1U << i;
        if (!((c.pos | c.neg) & bit)) continue;
        if (!out.empty()) out += " and ";
        if (c.neg & bit) out += "not ";
        out += f.names()[i];
    }
    return out.empty() ? "T" : out;
}

const std::vector<ActionModel>& ModelSet::models_of(const std::string& action) const {
    auto it = actions.find(action);
    if (it == actions.end() || it->second.empty()) {
        throw AnalysisError(AnalysisErrorKind::MissingModel, "no model for action '" + action + "'");
    }
    return it->second;
}

std::optional<PropCondition> regress(const PropCondition& goal, const ActionModel& a) {
    if ((goal.pos & a.del) || (goal.neg & a.add)) return std::nullopt;
    PropCondition r;
    r.pos = a.pre.pos | (goal.pos & ~a.add);
    r.neg = a.pre.neg | (goal.neg & ~a.del);
    if (r.contradictory()) return std::nullopt;
    return r;
}

namespace {

void add_literal(const lang::Expr& e, bool positive, const FeatureSet& f, PropCondition& out) {
    const auto* v = std::get_if<lang::expr::Var>(&e.node);
    if (!v) {
        throw AnalysisError(AnalysisErrorKind::NonConjunctive,
                            "'" + lang::pretty(e) + "' is not a nullary feature");
    }
    const std::uint32_t bit = 1U << f.index(v->name);
    (positive ? out.pos : out.neg) |= bit;
    if (out.contradictory()) {
        throw AnalysisError(AnalysisErrorKind::NonConjunctive, "'" + v->name + "' required both true and false");
    }
}

void collect(const lang::Expr& e, const FeatureSet& f, PropCondition& out) {
    if (std::holds_alternative<lang::expr::True>(e.node)) return;
    if (const auto* a = std::get_if<lang::expr::And>(&e.node)) {
        for (const auto& o : a->operands) collect(*o, f, out);
        return;
    }
    if (const auto* n = std::get_if<lang::expr::Not>(&e.node)) {
        add_literal(*n->operand, false, f, out);
        return;
    }
    add_literal(e, true, f, out);
}

std::string action_name(const lang::ActionTerm& a) {
    if (!a.args.empty()) {
        throw AnalysisError(AnalysisErrorKind::NonConjunctive,
                            "action '" + lang::pretty(a) + "' has arguments; only propositional actions are analysed");
    }
    return a.is_nil() ? std::string() : a.name;
}

}  // namespace

PropCondition to_condition(const lang::Expr& e, const FeatureSet& features) {
    PropCondition c;
    collect(e, features, c);
    return c;
}

namespace {

void feature_names(const lang::Expr& e, std::vector<std::string>& out) {
    if (const auto* v = std::get_if<lang::expr::Var>(&e.node)) {
        if (std::find(out.begin(), out.end(), v->name) == out.end()) out.push_back(v->name);
    } else if (const auto* a = std::get_if<lang::expr::And>(&e.node)) {
        for (const auto& o : a->operands) feature_names(*o, out);
    } else if (const auto* n = std::get_if<lang::expr::Not>(&e.node)) {
        feature_names(*n->operand, out);
    }
}

}  // namespace

FeatureSet features_of(const lang::TRProgram& program) {
    std::vector<std::string> names;
    for (const auto& r : program.rules) feature_names(*r.condition, names);
    return FeatureSet(names);
}

PropSequence to_propositional(const lang::TRProgram& program, const FeatureSet& features) {
    PropSequence seq;
    for (const auto& r : program.rules) seq.push_back({to_condition(*r.condition, features), action_name(r.action)});
    return seq;
}

PropTree to_propositional(const lang::TRTree& tree, const FeatureSet& features) {
    PropTree out;
    for (const auto& n : tree.nodes) {
        PropTreeNode p;
        p.id = n.id;
        p.condition = to_condition(*n.condition, features);
        if (n.action_to_parent) p.action = action_name(*n.action_to_parent);
        out.push_back(p);
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].is_root()) continue;
        for (std::size_t j = 0; j < tree.nodes.size(); ++j) {
            if (tree.nodes[j].id == tree.nodes[i].parent) out[i].parent = j;
        }
        if (!out[i].parent) {
            throw AnalysisError(AnalysisErrorKind::NonConjunctive, "node '" + tree.nodes[i].id + "' has no parent");
        }
    }
    return out;
}

namespace {

/// Tries every model of `action` against `goal`; returns the first index
/// whose regression is entailed by `k`.
std::optional<std::size_t> achieving_model(const PropCondition& k, const PropCondition& goal,
                                           const std::vector<ActionModel>& models) {
    for (std::size_t m = 0; m < models.size(); ++m) {
        auto r = regress(goal, models[m]);
        if (r && entails(k, *r)) return m;
    }
    return std::nullopt;
}

}  // namespace

std::vector<RuleVerdict> check_regression_property(const PropSequence& seq, const ModelSet& models) {
    std::vector<RuleVerdict> out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        RuleVerdict v;
        v.index = i;
        if (i == 0) {
            v.passes = true;
            v.detail = "goal condition";
        } else if (seq[i].action.empty()) {
            v.detail = "nil action below the first rule achieves nothing";
        } else {
            const auto& ms = models.models_of(seq[i].action);
            for (std::size_t j = 0; j < i && !v.passes; ++j) {
                if (auto m = achieving_model(seq[i].condition, seq[j].condition, ms)) {
                    v.passes = true;
                    v.regresses_from = j;
                    v.model = m;
                }
            }
            v.detail = v.passes ? "" : "entails no regression of a higher condition through '" + seq[i].action + "'";
        }
        out.push_back(v);
    }
    return out;
}

std::optional<std::uint32_t> find_uncovered_state(const std::vector<PropCondition>& conditions,
                                                  std::size_t n_features) {
    if (n_features > kMaxFeatures) {
        throw AnalysisError(AnalysisErrorKind::TooManyFeatures, std::to_string(n_features) + " features");
    }
    const std::uint64_t states = std::uint64_t{1} << n_features;
    for (std::uint64_t s = 0; s < states; ++s) {
        const auto state = static_cast<std::uint32_t>(s);
        bool covered = std::any_of(conditions.begin(), conditions.end(),
                                   [&](const PropCondition& c) { return c.holds(state); });
        if (!covered) return state;
    }
    return std::nullopt;
}

AnalysisReport check_completeness(const PropSequence& seq, std::size_t n_features) {
    std::vector<PropCondition> conds;
    for (const auto& r : seq) conds.push_back(r.condition);
    AnalysisReport rep;
    rep.counterexample = find_uncovered_state(conds, n_features);
    rep.complete = !rep.counterexample;
    return rep;
}

AnalysisReport check_universal(const PropSequence& seq, const ModelSet& models) {
    AnalysisReport rep = check_completeness(seq, models.features.size());
    rep.verdicts = check_regression_property(seq, models);
    rep.universal = rep.complete && std::all_of(rep.verdicts.begin(), rep.verdicts.end(),
                                                [](const RuleVerdict& v) { return v.passes; });
    return rep;
}

AnalysisReport check_tree(const PropTree& tree, const ModelSet& models) {
    AnalysisReport rep;
    std::vector<PropCondition> conds;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        const auto& n = tree[i];
        conds.push_back(n.condition);
        RuleVerdict v;
        v.index = i;
        if (!n.parent) {
            v.passes = true;
            v.detail = "root";
        } else if (n.action.empty()) {
            v.detail = "nil action on a non-root node achieves nothing";
        } else {
            v.regresses_from = n.parent;
            v.model = achieving_model(n.condition, tree[*n.parent].condition, models.models_of(n.action));
            v.passes = v.model.has_value();
            if (!v.passes) {
                v.regresses_from.reset();
                v.detail = "does not entail the regression of parent '" + tree[*n.parent].id + "'";
            }
        }
        rep.verdicts.push_back(v);
    }
    rep.counterexample = find_uncovered_state(conds, models.features.size());
    rep.complete = !rep.counterexample;
    rep.universal = rep.complete && std::all_of(rep.verdicts.begin(), rep.verdicts.end(),
                                                [](const RuleVerdict& v) { return v.passes; });
    return rep;
}

std::string format_state(std::uint32_t state, const FeatureSet& f) {
    std::string out;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i) out += ", ";
        out += f.names()[i] + "=" + (((state >> i) & 1U) ? "1" : "0");
    }
    return out;
}

std::string format_report(const AnalysisReport& r, const FeatureSet& f) {
    std::string out;
    for (const auto& v : r.verdicts) {
        out += "rule " + std::to_string(v.index + 1) + ": " + (v.passes ? "ok" : "FAIL");
        if (v.regresses_from) out += " (regresses from " + std::to_string(*v.regresses_from + 1) + ")";
        if (!v.detail.empty() && !v.passes) out += " " + v.detail;
        out += "\n";
    }
    out += std::string("complete: ") + (r.complete ? "yes" : "no");
    if (r.counterexample) out += " (uncovered: " + format_state(*r.counterexample, f) + ")";
    out += std::string("\nuniversal: ") + (r.universal ? "yes" : "no") + "\n";
    return out;
}

}  // namespace tr::analysis
