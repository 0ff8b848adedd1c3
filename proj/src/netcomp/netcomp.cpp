#include "tr/netcomp/netcomp.hpp"

#include <algorithm>
#include <memory>

#include "json.hpp"
#include "tr/runtime/machine.hpp"
#include "tr/runtime/prop_env.hpp"

namespace tr::netcomp {

const char* to_string(NetErrorKind kind) {
    switch (kind) {
        case NetErrorKind::NonConjunctive: return "NonConjunctive";
        case NetErrorKind::DimensionMismatch: return "DimensionMismatch";
        case NetErrorKind::TooLarge: return "TooLarge";
        case NetErrorKind::InvalidNet: return "InvalidNet";
    }
    return "Unknown";
}

NetError::NetError(NetErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

bool Unit::fires(const std::vector<double>& input) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) sum += weights[i] * input[i];
    return sum >= threshold;
}

ThresholdNet compile(const analysis::PropSequence& seq, const analysis::FeatureSet& features) {
    ThresholdNet net;
    net.n = features.size();
    net.features = features.names();
    const std::size_t m = seq.size();
    std::vector<std::size_t> action_of(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& c = seq[i].condition;
        if (c.contradictory()) throw NetError(NetErrorKind::NonConjunctive, "rule " + std::to_string(i + 1));
        Unit u;
        u.weights.assign(net.n, 0.0);
        for (std::size_t f = 0; f < net.n; ++f) {
            if ((c.pos >> f) & 1U) {
                u.weights[f] = 1.0;
                u.threshold += 1.0;
            } else if ((c.neg >> f) & 1U) {
                u.weights[f] = -1.0;
            }
        }
        net.layer1.push_back(u);

        Unit a;
        a.weights.assign(m, 0.0);
        for (std::size_t j = 0; j < i; ++j) a.weights[j] = -1.0;
        a.weights[i] = 1.0;
        a.threshold = 1.0;
        net.layer2.push_back(a);

        const std::string name = seq[i].action.empty() ? kNilAction : seq[i].action;
        auto it = std::find(net.action_names.begin(), net.action_names.end(), name);
        action_of[i] = static_cast<std::size_t>(it - net.action_names.begin());
        if (it == net.action_names.end()) net.action_names.push_back(name);
    }
    for (std::size_t k = 0; k < net.action_names.size(); ++k) {
        Unit b;
        b.weights.assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (action_of[i] == k) b.weights[i] = 1.0;
        }
        b.threshold = 1.0;
        net.layer3.push_back(b);
    }
    return net;
}

ThresholdNet compile(const lang::TRProgram& program, const analysis::FeatureSet& features) {
    try {
        return compile(analysis::to_propositional(program, features), features);
    } catch (const analysis::AnalysisError& e) {
        throw NetError(NetErrorKind::NonConjunctive, e.what());
    }
}

namespace {

std::vector<double> run(const std::vector<Unit>& layer, const std::vector<double>& input) {
    std::vector<double> out;
    out.reserve(layer.size());
    for (const auto& u : layer) {
        if (u.weights.size() != input.size()) {
            throw NetError(NetErrorKind::InvalidNet, "unit has " + std::to_string(u.weights.size()) +
                                                         " weights for " + std::to_string(input.size()) + " inputs");
        }
        out.push_back(u.fires(input) ? 1.0 : 0.0);
    }
    return out;
}

}  // namespace

std::vector<double> layer1_outputs(const ThresholdNet& net, const std::vector<bool>& x) {
    if (x.size() != net.n) {
        throw NetError(NetErrorKind::DimensionMismatch,
                       "input has " + std::to_string(x.size()) + " bits, net expects " + std::to_string(net.n));
    }
    return run(net.layer1, std::vector<double>(x.begin(), x.end()));
}

std::vector<double> layer2_outputs(const ThresholdNet& net, const std::vector<bool>& x) {
    return run(net.layer2, layer1_outputs(net, x));
}

std::vector<std::size_t> firing_associators(const ThresholdNet& net, const std::vector<bool>& x) {
    std::vector<double> out = run(net.layer3, layer2_outputs(net, x));
    std::vector<std::size_t> firing;
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (out[k] > 0.0) firing.push_back(k);
    }
    return firing;
}

std::optional<std::size_t> forward(const ThresholdNet& net, const std::vector<bool>& x) {
    std::vector<std::size_t> firing = firing_associators(net, x);
    if (firing.size() > 1) throw NetError(NetErrorKind::InvalidNet, "several associators fire");
    if (firing.empty()) return std::nullopt;
    return firing.front();
}

std::vector<bool> input_of(std::uint32_t state, std::size_t n) {
    std::vector<bool> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = (state >> i) & 1U;
    return x;
}

VerifyResult verify_equivalence(const ThresholdNet& net, const lang::TRProgram& program,
                                const analysis::FeatureSet& features) {
    if (features.size() > kMaxVerifyInputs) {
        throw NetError(NetErrorKind::TooLarge, std::to_string(features.size()) + " inputs, at most " +
                                                   std::to_string(kMaxVerifyInputs) + " verified exhaustively");
    }
    if (features.size() != net.n) {
        throw NetError(NetErrorKind::DimensionMismatch, "net and feature set differ in size");
    }
    auto lib = std::make_shared<lang::ProgramLibrary>();
    lib->programs.emplace(program.name, program);
    lib->order.push_back(program.name);
    lang::ActionTerm entry;
    entry.kind = lang::ActionTerm::Kind::ProgramCall;
    entry.name = program.name;
    runtime::PropositionalEnv env(features.names());

    VerifyResult result;
    for (std::uint32_t s = 0; s < (1U << net.n); ++s) {
        env.set(s);
        std::string expected;
        try {
            auto machine = runtime::Machine::init(lib, entry);
            runtime::ActionCommand cmd = machine.tick(env).command;
            expected = cmd.is_nil() ? kNilAction : cmd.name;
        } catch (const runtime::RuntimeError& e) {
            if (e.kind() != runtime::ErrorKind::NoApplicableRule) throw;
            expected = "NONE";
        }
        std::string got = "NONE";
        for (std::size_t k : firing_associators(net, input_of(s, net.n))) {
            got = got == "NONE" ? net.action_names.at(k) : got + "+" + net.action_names.at(k);
        }
        if (got != expected) {
            result.equivalent = false;
            result.counterexample = s;
            result.net_action = got;
            result.interpreter_action = expected;
            return result;
        }
    }
    return result;
}

using nlohmann::json;

namespace {

json units(const std::vector<Unit>& layer) {
    json out = json::array();
    for (const auto& u : layer) out.push_back({{"weights", u.weights}, {"threshold", u.threshold}});
    return out;
}

std::vector<Unit> units(const json& j) {
    std::vector<Unit> out;
    for (const auto& u : j) out.push_back(Unit{u.at("weights").get<std::vector<double>>(), u.at("threshold").get<double>()});
    return out;
}

}  // namespace

std::string to_json(const ThresholdNet& net) {
    json doc{{"n", net.n},
             {"features", net.features},
             {"layer1", units(net.layer1)},
             {"layer2", units(net.layer2)},
             {"layer3", units(net.layer3)},
             {"action_names", net.action_names}};
    return doc.dump(2);
}

ThresholdNet from_json(const std::string& text) {
    try {
        json doc = json::parse(text);
        ThresholdNet net;
        net.n = doc.at("n").get<std::size_t>();
        net.features = doc.value("features", std::vector<std::string>{});
        net.layer1 = units(doc.at("layer1"));
        net.layer2 = units(doc.at("layer2"));
        net.layer3 = units(doc.at("layer3"));
        net.action_names = doc.at("action_names").get<std::vector<std::string>>();
        if (net.action_names.size() != net.layer3.size()) {
            throw NetError(NetErrorKind::InvalidNet, "one action name per associator required");
        }
        return net;
    } catch (const json::exception& e) {
        throw NetError(NetErrorKind::InvalidNet, e.what());
    }
}

}  // namespace tr::netcomp
