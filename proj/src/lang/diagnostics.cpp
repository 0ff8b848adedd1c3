#include "tr/lang/diagnostics.hpp"

#include <sstream>

namespace tr::lang {

const char* to_string(DiagnosticKind kind) {
    switch (kind) {
        case DiagnosticKind::SyntaxError: return "SyntaxError";
        case DiagnosticKind::DuplicateName: return "DuplicateName";
        case DiagnosticKind::UnknownEscape: return "UnknownEscape";
        case DiagnosticKind::NotSupported: return "NotSupported";
        case DiagnosticKind::InvalidTolerance: return "InvalidTolerance";
        case DiagnosticKind::UnresolvedName: return "UnresolvedName";
        case DiagnosticKind::ArityMismatch: return "ArityMismatch";
        case DiagnosticKind::UnboundVariable: return "UnboundVariable";
        case DiagnosticKind::ZeroRules: return "ZeroRules";
        case DiagnosticKind::TreeStructure: return "TreeStructure";
    }
    return "Unknown";
}

std::string format(const Diagnostics& diagnostics) {
    std::ostringstream out;
    for (const auto& d : diagnostics) {
        out << d.span.line << ':' << d.span.column << ": " << to_string(d.kind) << ": " << d.message
            << '\n';
    }
    return out.str();
}

ParseError::ParseError(Diagnostics diagnostics)
    : std::runtime_error(format(diagnostics)), diagnostics_(std::move(diagnostics)) {}

}  // namespace tr::lang
