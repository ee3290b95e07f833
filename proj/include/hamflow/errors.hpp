#pragma once

#include <stdexcept>
#include <string>

namespace hamflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define HAMFLOW_ERROR(name)                                   \
    struct name : Error {                                     \
        explicit name(const std::string& what) : Error(#name ": " + what) {} \
    }

HAMFLOW_ERROR(EmptyRegion);
HAMFLOW_ERROR(DegenerateLevel);
HAMFLOW_ERROR(NoCycles);
HAMFLOW_ERROR(CuspDetected);
HAMFLOW_ERROR(ZeroArea);
HAMFLOW_ERROR(OnBoundary);
HAMFLOW_ERROR(TurnBudgetImpossible);
HAMFLOW_ERROR(NotNested);
HAMFLOW_ERROR(OrientationMismatch);
HAMFLOW_ERROR(EmptyGoodSet);
HAMFLOW_ERROR(GraphOrderViolated);
HAMFLOW_ERROR(Unbalanced);
HAMFLOW_ERROR(NotInvariant);
HAMFLOW_ERROR(BudgetTooSmall);
HAMFLOW_ERROR(ParamsInfeasible);
HAMFLOW_ERROR(ConfigError);
HAMFLOW_ERROR(IoError);

#undef HAMFLOW_ERROR

} // namespace hamflow
