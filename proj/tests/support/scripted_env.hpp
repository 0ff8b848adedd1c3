#pragma once

#include <functional>
#include <map>
#include <string>

#include "tr/runtime/value.hpp"

namespace tr::test {

/// Environment driven by per-symbol lambdas that tests rewire between ticks.
class ScriptedEnv : public runtime::EnvProvider {
  public:
    using Fn = std::function<runtime::Sensed(std::span<const runtime::Value>)>;

    void define(const std::string& name, std::size_t arity, Fn fn) {
        table_[name] = arity;
        fns_[name] = std::move(fn);
    }
    void constant(const std::string& name, runtime::Value v) {
        define(name, 0, [v](std::span<const runtime::Value>) { return runtime::Sensed{v}; });
    }

    const runtime::SymbolTable& symbols() const override { return table_; }
    runtime::Sensed resolve(std::string_view symbol, std::span<const runtime::Value> args) override {
        auto it = fns_.find(std::string(symbol));
        if (it == fns_.end()) {
            throw runtime::RuntimeError(runtime::ErrorKind::EnvError, "unknown symbol " + std::string(symbol));
        }
        ++calls;
        return it->second(args);
    }

    std::size_t calls = 0;

  private:
    runtime::SymbolTable table_;
    std::map<std::string, Fn> fns_;
};

}  // namespace tr::test
