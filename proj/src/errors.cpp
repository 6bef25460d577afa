#include "fqdist/errors.hpp"

namespace fqdist {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NonPrime: return "NonPrime";
        case Errc::DegreeOutOfRange: return "DegreeOutOfRange";
        case Errc::FieldTooLarge: return "FieldTooLarge";
        case Errc::DivisionByZero: return "DivisionByZero";
        case Errc::FieldMismatch: return "FieldMismatch";
        case Errc::EmptySet: return "EmptySet";
        case Errc::SizeTooLarge: return "SizeTooLarge";
        case Errc::NoSqrtMinusOne: return "NoSqrtMinusOne";
        case Errc::BadDimension: return "BadDimension";
        case Errc::MemoryCap: return "MemoryCap";
        case Errc::ToleranceExceeded: return "ToleranceExceeded";
        case Errc::BudgetExceeded: return "BudgetExceeded";
        case Errc::EvenCharacteristic: return "EvenCharacteristic";
        case Errc::ZeroPin: return "ZeroPin";
        case Errc::BadFactorization: return "BadFactorization";
        case Errc::BadHeader: return "BadHeader";
        case Errc::BadModulus: return "BadModulus";
        case Errc::CoordinateOutOfRange: return "CoordinateOutOfRange";
        case Errc::SizeMismatch: return "SizeMismatch";
        case Errc::CapExceeded: return "CapExceeded";
        case Errc::BadConfig: return "BadConfig";
    }
    return "UnknownError";
}

} // namespace fqdist
