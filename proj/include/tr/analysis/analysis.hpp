#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tr/lang/ast.hpp"

namespace tr::analysis {

inline constexpr std::size_t kMaxFeatures = 20;

enum class AnalysisErrorKind { UnknownFeature, MissingModel, TooManyFeatures, NonConjunctive, InvalidModel };

const char* to_string(AnalysisErrorKind kind);

class AnalysisError : public std::runtime_error {
  public:
    AnalysisError(AnalysisErrorKind kind, const std::string& message);
    AnalysisErrorKind kind() const noexcept { return kind_; }

  private:
    AnalysisErrorKind kind_;
};

/// Ordered feature names; feature i is bit i of every mask.
class FeatureSet {
  public:
    FeatureSet() = default;
    explicit FeatureSet(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    std::size_t index(const std::string& name) const;  // throws UnknownFeature

  private:
    std::vector<std::string> names_;
};

/// Conjunction of literals. The empty conjunction is TRUE.
struct PropCondition {
    std::uint32_t pos = 0;
    std::uint32_t neg = 0;

    bool holds(std::uint32_t state) const { return (state & pos) == pos && (state & neg) == 0; }
    bool contradictory() const { return (pos & neg) != 0; }
    bool operator==(const PropCondition&) const = default;
};

/// Every state satisfying `k` satisfies `r` (exact for conjunctions).
inline bool entails(const PropCondition& k, const PropCondition& r) {
    return (k.pos & r.pos) == r.pos && (k.neg & r.neg) == r.neg;
}

std::string to_string(const PropCondition& c, const FeatureSet& f);

/// STRIPS-style normal effect of one durative action, taken at its end.
struct ActionModel {
    std::string name;
    PropCondition pre;
    std::uint32_t add = 0;
    std::uint32_t del = 0;

    std::uint32_t apply(std::uint32_t state) const { return (state & ~del) | add; }
};

/// Action models keyed by action name. An action may carry several
/// alternative models when its normal effect depends on the situation.
struct ModelSet {
    FeatureSet features;
    std::map<std::string, std::vector<ActionModel>> actions;

    const std::vector<ActionModel>& models_of(const std::string& action) const;  // throws MissingModel
};

/// Weakest condition under which `a` achieves `goal`; nullopt is BOTTOM.
std::optional<PropCondition> regress(const PropCondition& goal, const ActionModel& a);

struct PropRule {
    PropCondition condition;
    std::string action;  // empty for nil
};

using PropSequence = std::vector<PropRule>;

struct PropTreeNode {
    std::string id;
    PropCondition condition;
    std::optional<std::size_t> parent;  // index into the node list, none for the root
    std::string action;                 // empty for nil and for the root
};

using PropTree = std::vector<PropTreeNode>;

/// Lowers a program whose conditions are conjunctions of nullary features and
/// whose actions take no arguments.
PropSequence to_propositional(const lang::TRProgram& program, const FeatureSet& features);
PropTree to_propositional(const lang::TRTree& tree, const FeatureSet& features);
PropCondition to_condition(const lang::Expr& e, const FeatureSet& features);

/// Nullary features named in the program's conditions, in order of first use.
FeatureSet features_of(const lang::TRProgram& program);

struct RuleVerdict {
    std::size_t index = 0;
    bool passes = false;
    std::optional<std::size_t> regresses_from;  // j < index (sequences) or the parent (trees)
    std::optional<std::size_t> model;           // which alternative model witnessed it
    std::string detail;
};

struct AnalysisReport {
    std::vector<RuleVerdict> verdicts;
    bool complete = false;
    std::optional<std::uint32_t> counterexample;  // a state falsifying every condition
    bool universal = false;
};

std::vector<RuleVerdict> check_regression_property(const PropSequence& seq, const ModelSet& models);

/// Exhaustive over all 2^n states; returns a state where no condition holds.
std::optional<std::uint32_t> find_uncovered_state(const std::vector<PropCondition>& conditions,
                                                  std::size_t n_features);

AnalysisReport check_completeness(const PropSequence& seq, std::size_t n_features);
AnalysisReport check_universal(const PropSequence& seq, const ModelSet& models);
AnalysisReport check_tree(const PropTree& tree, const ModelSet& models);

std::string format_state(std::uint32_t state, const FeatureSet& f);
std::string format_report(const AnalysisReport& r, const FeatureSet& f);

/// {"features": [...], "actions": {"move": [{"pre": ["a", "!b"], "add": [...], "del": [...]}]}}
/// A single model object is accepted in place of a one-element list.
ModelSet models_from_json(const std::string& text);
std::string models_to_json(const ModelSet& models);

}  // namespace tr::analysis
