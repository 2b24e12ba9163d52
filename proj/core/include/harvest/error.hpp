#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace harvest {

enum class ErrorKind {
    InvalidArgument,
    // ctmc
    NegativeOffDiagonal,
    NonAbsorbingRowViolation,
    RowSumTooLarge,
    TimeOutOfRange,
    // model
    RegimeOutOfRange,
    NegativePopulation,
    GridTooSmall,
    // simulate / strategies
    NonPositiveInitial,
    StrategyScheduleOverflow,
    ScheduleUnderflow,
    // analytic
    DegenerateDenominator,
    UnclassifiedBoundary,
    ComplexRoots,
    OrderingViolation,
    InvalidGamma,
    // scenario / cli
    ConfigParse,
    DimensionMismatch,
    EmptyTable,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every recoverable failure in the library is reported as an `Error`
/// carrying a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace harvest
