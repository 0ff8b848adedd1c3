#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tr/common/vec2.hpp"
#include "tr/lang/ast.hpp"

namespace tr::runtime {

struct Angle {
    double radians = 0.0;  // (-pi, pi]
    bool operator==(const Angle&) const = default;
};

struct ObjectRef {
    std::string id;
    bool operator==(const ObjectRef&) const = default;
};

using Value = std::variant<bool, double, Angle, Vec2, ObjectRef>;

std::string to_string(const Value& v);
const char* kind_name(const Value& v);

enum class ErrorKind {
    UnknownEntry,
    ArityMismatch,
    NoApplicableRule,
    RecursionLimit,
    EnvError,
    TypeError,
    NotStarted,
};

const char* to_string(ErrorKind kind);

class RuntimeError : public std::runtime_error {
  public:
    RuntimeError(ErrorKind kind, const std::string& message);
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// A sensed quantity that becomes a truth value through the caller's
/// two-threshold comparator, e.g. a distance with enter/exit bands.
struct Graded {
    double measure = 0.0;
    lang::Tolerance band;
};

using Sensed = std::variant<Value, Graded>;

using SymbolTable = std::map<std::string, std::size_t, std::less<>>;

/// Source of the environment symbols referenced by conditions and arguments.
/// resolve() must be deterministic between two sense phases; failures throw
/// RuntimeError(EnvError).
class EnvProvider {
  public:
    virtual ~EnvProvider() = default;
    virtual const SymbolTable& symbols() const = 0;
    virtual Sensed resolve(std::string_view symbol, std::span<const Value> args) = 0;
};

/// Two-threshold comparator: enters below `band.enter`, holds while <= `band.exit`.
inline bool schmitt(std::optional<bool> previous, double measure, const lang::Tolerance& band) {
    if (previous.value_or(false)) return measure <= band.exit;
    return measure < band.enter;
}

}  // namespace tr::runtime
