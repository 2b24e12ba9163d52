#include "harvest/error.hpp"

namespace harvest {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::NegativeOffDiagonal: return "NegativeOffDiagonal";
        case ErrorKind::NonAbsorbingRowViolation: return "NonAbsorbingRowViolation";
        case ErrorKind::RowSumTooLarge: return "RowSumTooLarge";
        case ErrorKind::TimeOutOfRange: return "TimeOutOfRange";
        case ErrorKind::RegimeOutOfRange: return "RegimeOutOfRange";
        case ErrorKind::NegativePopulation: return "NegativePopulation";
        case ErrorKind::GridTooSmall: return "GridTooSmall";
        case ErrorKind::NonPositiveInitial: return "NonPositiveInitial";
        case ErrorKind::StrategyScheduleOverflow: return "StrategyScheduleOverflow";
        case ErrorKind::ScheduleUnderflow: return "ScheduleUnderflow";
        case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorKind::UnclassifiedBoundary: return "UnclassifiedBoundary";
        case ErrorKind::ComplexRoots: return "ComplexRoots";
        case ErrorKind::OrderingViolation: return "OrderingViolation";
        case ErrorKind::InvalidGamma: return "InvalidGamma";
        case ErrorKind::ConfigParse: return "ConfigParse";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyTable: return "EmptyTable";
    }
    return "Unknown";
}

}  // namespace harvest
