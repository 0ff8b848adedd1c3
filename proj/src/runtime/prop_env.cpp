#include "tr/runtime/prop_env.hpp"

namespace tr::runtime {

PropositionalEnv::PropositionalEnv(std::vector<std::string> features) : features_(std::move(features)) {
    if (features_.size() > 64) throw std::invalid_argument("at most 64 propositional features");
    for (std::size_t i = 0; i < features_.size(); ++i) table_.emplace(features_[i], i);
}

Sensed PropositionalEnv::resolve(std::string_view symbol, std::span<const Value> args) {
    auto it = table_.find(symbol);
    if (it == table_.end()) throw RuntimeError(ErrorKind::EnvError, "unknown feature '" + std::string(symbol) + "'");
    if (!args.empty()) throw RuntimeError(ErrorKind::EnvError, "feature '" + std::string(symbol) + "' takes no arguments");
    return Value{((mask_ >> it->second) & 1U) != 0};
}

}  // namespace tr::runtime
