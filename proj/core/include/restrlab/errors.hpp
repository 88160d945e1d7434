#pragma once

#include <stdexcept>
#include <string>

namespace restrlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define RESTRLAB_ERROR(Name)                   \
  struct Name : Error {                        \
    explicit Name(const std::string& what)     \
        : Error(std::string(#Name ": ") + what) {} \
  }

RESTRLAB_ERROR(InvalidArgument);
RESTRLAB_ERROR(SeparationViolation);
RESTRLAB_ERROR(DominanceViolation);
RESTRLAB_ERROR(InfeasibleWindow);
RESTRLAB_ERROR(EmptyJ);
RESTRLAB_ERROR(NonConvergence);
RESTRLAB_ERROR(BandViolation);
RESTRLAB_ERROR(FitUnstable);
RESTRLAB_ERROR(GridTooCoarse);
RESTRLAB_ERROR(IndexSetTooLarge);
RESTRLAB_ERROR(PropertyViolation);
RESTRLAB_ERROR(AssumptionViolation);
RESTRLAB_ERROR(TransversalityFailure);
RESTRLAB_ERROR(BoundViolation);
RESTRLAB_ERROR(HypothesisViolation);
RESTRLAB_ERROR(TailTooLarge);
RESTRLAB_ERROR(DivergenceDetected);
RESTRLAB_ERROR(OrderTooHigh);
RESTRLAB_ERROR(ConfigInvalid);
RESTRLAB_ERROR(IoFailure);

#undef RESTRLAB_ERROR

}  // namespace restrlab
