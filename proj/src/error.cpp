#include "svyglm/error.hpp"

namespace svyglm {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse: return "ParseError";
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::BadWeight: return "BadWeight";
        case ErrorKind::BadFpc: return "BadFpc";
        case ErrorKind::PsuStratumConflict: return "PsuStratumConflict";
        case ErrorKind::MissingDesignValue: return "MissingDesignValue";
        case ErrorKind::EmptyData: return "EmptyData";
        case ErrorKind::UnknownColumn: return "UnknownColumn";
        case ErrorKind::NonNumericColumn: return "NonNumericColumn";
        case ErrorKind::UnknownReferenceLevel: return "UnknownReferenceLevel";
        case ErrorKind::AllRowsDropped: return "AllRowsDropped";
        case ErrorKind::Formula: return "FormulaError";
        case ErrorKind::Domain: return "DomainError";
        case ErrorKind::NonPositiveDf: return "NonPositiveDf";
        case ErrorKind::RankDeficient: return "RankDeficient";
        case ErrorKind::SingletonStratum: return "SingletonStratum";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::SingularContrast: return "SingularContrast";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

}  // namespace svyglm
