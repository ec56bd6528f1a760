#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svyglm {

enum class ErrorKind {
    Parse,
    MissingColumn,
    BadWeight,
    BadFpc,
    PsuStratumConflict,
    MissingDesignValue,
    EmptyData,
    UnknownColumn,
    NonNumericColumn,
    UnknownReferenceLevel,
    AllRowsDropped,
    Formula,
    Domain,
    NonPositiveDf,
    RankDeficient,
    SingletonStratum,
    DimensionMismatch,
    SingularContrast,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so the
// CLI can map it to an exit status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace svyglm
