#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace splinefold {

enum class ErrorKind {
    FootMismatch,
    OutOfInjectivityRadius,
    AntipodalPoints,
    NoConvergence,
    SpreadTooLarge,
    StepUnstable,
    ParameterOutOfRange,
    InsufficientData,
    DegenerateData,
    MalformedHeader,
    MalformedRow,
    EmptyInput,
    NoWindData,
    SingleClassInput,
    EmptyClass,
    ClassTooSmall,
    InvalidArgument,
    MissingCache,
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `index()` carries the offending
/// component (spline anchor, sample, input line) when there is one.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message,
          std::optional<std::size_t> index = std::nullopt);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::optional<std::size_t> index() const noexcept { return index_; }
    /// The message without the kind/index prefix.
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

    /// Same error, attributed to component `index`.
    [[nodiscard]] Error at(std::size_t index) const { return Error(kind_, detail_, index); }

private:
    ErrorKind kind_;
    std::string detail_;
    std::optional<std::size_t> index_;
};

}  // namespace splinefold
