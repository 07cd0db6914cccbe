#include "trackfda/error.hpp"

namespace trackfda {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Truncation: return "truncation error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Length: return "length error";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Singular: return "singularity error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Lookup: return "lookup error";
    case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

namespace {
std::string decorate(ErrorKind kind, const std::string& message, long line) {
    std::string out(to_string(kind));
    if (line > 0) out += " at line " + std::to_string(line);
    out += ": ";
    out += message;
    return out;
}
}  // namespace

Error::Error(ErrorKind kind, const std::string& message, long line)
    : std::runtime_error(decorate(kind, message, line)), kind_(kind), line_(line) {}

}  // namespace trackfda
