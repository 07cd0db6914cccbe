#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trackfda {

enum class ErrorKind {
    Parse,       // malformed input text
    Truncation,  // fewer records than declared
    Validation,  // values violate a domain invariant
    Schema,      // missing or unknown column
    Shape,       // inconsistent matrix or window dimensions
    Length,      // series too short
    Domain,      // evaluation point outside a basis domain
    Singular,    // rank-deficient linear system
    Config,      // invalid configuration
    Lookup,      // unknown identifier
    Io,          // unreadable or unwritable file
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. Every failure the library reports carries a kind so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, long line = 0);

    ErrorKind kind() const noexcept { return kind_; }
    /// 1-based input line, or 0 when not tied to a line.
    long line() const noexcept { return line_; }

private:
    ErrorKind kind_;
    long line_;
};

}  // namespace trackfda
