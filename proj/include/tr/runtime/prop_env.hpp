#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tr/runtime/value.hpp"

namespace tr::runtime {

/// Environment of nullary Boolean features whose truth comes from a bit mask:
/// feature i is true iff bit i of the mask is set.
class PropositionalEnv : public EnvProvider {
  public:
    explicit PropositionalEnv(std::vector<std::string> features);

    void set(std::uint64_t mask) { mask_ = mask; }
    std::uint64_t mask() const { return mask_; }
    const std::vector<std::string>& features() const { return features_; }

    const SymbolTable& symbols() const override { return table_; }
    Sensed resolve(std::string_view symbol, std::span<const Value> args) override;

  private:
    std::vector<std::string> features_;
    SymbolTable table_;
    std::uint64_t mask_ = 0;
};

}  // namespace tr::runtime
