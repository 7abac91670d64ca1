#pragma once

#include <stdexcept>
#include <string>

namespace zrpm {

enum class ErrorKind {
    NotIrreducible,
    DegenerateModel,
    SetsOverlapOrEmpty,
    AlphaOutOfRange,
    Overflow,
    UndefinedOnNeighborhood,
    EdgeOutsideGraph,
    SolverFailure,
    ZeroCapacity,
    BoundaryConditionViolated,
    DegenerateDenominator,
    EmptyOrFullValley,
    NotConstantOnValley,
    ScaleOrderViolated,
    EpsOutOfRange,
    PropertyCheckFailed,
    OutsideTube,
    ConstituentMissing,
    ConfigInvalid,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace zrpm
