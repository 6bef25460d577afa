#pragma once

#include <stdexcept>
#include <string>

namespace fqdist {

/// Machine-readable failure categories for everything the library can reject.
enum class Errc {
    NonPrime,
    DegreeOutOfRange,
    FieldTooLarge,
    DivisionByZero,
    FieldMismatch,
    EmptySet,
    SizeTooLarge,
    NoSqrtMinusOne,
    BadDimension,
    MemoryCap,
    ToleranceExceeded,
    BudgetExceeded,
    EvenCharacteristic,
    ZeroPin,
    BadFactorization,
    BadHeader,
    BadModulus,
    CoordinateOutOfRange,
    SizeMismatch,
    CapExceeded,
    BadConfig,
};

const char* errc_name(Errc c);

/// Single exception type; tests and the CLI dispatch on code().
class FqError : public std::runtime_error {
public:
    FqError(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

} // namespace fqdist
