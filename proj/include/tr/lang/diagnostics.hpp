#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tr/lang/ast.hpp"

namespace tr::lang {

enum class DiagnosticKind {
    SyntaxError,
    DuplicateName,
    UnknownEscape,
    NotSupported,
    InvalidTolerance,
    UnresolvedName,
    ArityMismatch,
    UnboundVariable,
    ZeroRules,
    TreeStructure,
};

const char* to_string(DiagnosticKind kind);

struct Diagnostic {
    DiagnosticKind kind;
    SourceSpan span;
    std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

/// "line:col: kind: message", one per line.
std::string format(const Diagnostics& diagnostics);

/// Thrown by parse(); never accompanied by a partial library.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(Diagnostics diagnostics);
    const Diagnostics& diagnostics() const noexcept { return diagnostics_; }

  private:
    Diagnostics diagnostics_;
};

}  // namespace tr::lang
