#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tr/analysis/analysis.hpp"

namespace tr::netcomp {

enum class NetErrorKind { NonConjunctive, DimensionMismatch, TooLarge, InvalidNet };

const char* to_string(NetErrorKind kind);

class NetError : public std::runtime_error {
  public:
    NetError(NetErrorKind kind, const std::string& message);
    NetErrorKind kind() const noexcept { return kind_; }

  private:
    NetErrorKind kind_;
};

/// Fires iff dot(weights, input) >= threshold.
struct Unit {
    std::vector<double> weights;
    double threshold = 0.0;

    bool fires(const std::vector<double>& input) const;
    bool operator==(const Unit&) const = default;
};

/// Three layers: one condition unit per rule, one AND unit per rule that
/// inhibits on every earlier rule, and one OR associator per distinct action.
struct ThresholdNet {
    std::size_t n = 0;
    std::vector<std::string> features;  // length n, informational
    std::vector<Unit> layer1;
    std::vector<Unit> layer2;
    std::vector<Unit> layer3;
    std::vector<std::string> action_names;  // one per associator; "nil" for the null action

    bool operator==(const ThresholdNet&) const = default;
};

inline constexpr const char* kNilAction = "nil";
inline constexpr std::size_t kMaxVerifyInputs = 16;

ThresholdNet compile(const analysis::PropSequence& seq, const analysis::FeatureSet& features);

/// Lowers `program` to propositional form first; NonConjunctive on failure.
ThresholdNet compile(const lang::TRProgram& program, const analysis::FeatureSet& features);

std::vector<double> layer1_outputs(const ThresholdNet& net, const std::vector<bool>& x);
std::vector<double> layer2_outputs(const ThresholdNet& net, const std::vector<bool>& x);

std::vector<std::size_t> firing_associators(const ThresholdNet& net, const std::vector<bool>& x);

/// Index of the unique firing associator, nullopt if none fires. A corrupted
/// net where several fire raises InvalidNet.
std::optional<std::size_t> forward(const ThresholdNet& net, const std::vector<bool>& x);

std::vector<bool> input_of(std::uint32_t state, std::size_t n);

struct VerifyResult {
    bool equivalent = true;
    std::optional<std::uint32_t> counterexample;
    std::string net_action;          // "NONE" when no associator fires, "a+b" when several do
    std::string interpreter_action;  // "NONE" on NoApplicableRule
};

/// Runs the interpreter on every input in {0,1}^n and compares.
VerifyResult verify_equivalence(const ThresholdNet& net, const lang::TRProgram& program,
                                const analysis::FeatureSet& features);

std::string to_json(const ThresholdNet& net);
ThresholdNet from_json(const std::string& text);

}  // namespace tr::netcomp
