#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parastab {

enum class ErrorKind {
    InvalidArgument,
    EmptyRegion,
    NonFinite,
    BlowUp,
    DimMismatch,
    BadP,
    HypothesisViolation,
    EmptyList,
    ParseError,
    UnknownCatalogId,
    RangeError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    /// Message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace parastab
