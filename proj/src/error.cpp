#include "splinefold/error.hpp"

namespace splinefold {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::FootMismatch: return "FootMismatch";
        case ErrorKind::OutOfInjectivityRadius: return "OutOfInjectivityRadius";
        case ErrorKind::AntipodalPoints: return "AntipodalPoints";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::SpreadTooLarge: return "SpreadTooLarge";
        case ErrorKind::StepUnstable: return "StepUnstable";
        case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::DegenerateData: return "DegenerateData";
        case ErrorKind::MalformedHeader: return "MalformedHeader";
        case ErrorKind::MalformedRow: return "MalformedRow";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::NoWindData: return "NoWindData";
        case ErrorKind::SingleClassInput: return "SingleClassInput";
        case ErrorKind::EmptyClass: return "EmptyClass";
        case ErrorKind::ClassTooSmall: return "ClassTooSmall";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::MissingCache: return "MissingCache";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message,
                     std::optional<std::size_t> index) {
    std::string out(to_string(kind));
    if (index) out += " [" + std::to_string(*index) + "]";
    out += ": ";
    out += message;
    return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::optional<std::size_t> index)
    : std::runtime_error(decorate(kind, message, index)), kind_(kind), detail_(message), index_(index) {}

}  // namespace splinefold
