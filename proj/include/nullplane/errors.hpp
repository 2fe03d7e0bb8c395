#pragma once

#include <stdexcept>
#include <string>

namespace nullplane {

// Base for every domain error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define NULLPLANE_ERROR(Name)                   \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    };

NULLPLANE_ERROR(NonConvergent)
NULLPLANE_ERROR(BoundaryLeak)
NULLPLANE_ERROR(ZeroModePresent)
NULLPLANE_ERROR(NotCyclic)
NULLPLANE_ERROR(NotSeparating)
NULLPLANE_ERROR(SingularSpectrum)
NULLPLANE_ERROR(ZeroMassZeroMomentum)
NULLPLANE_ERROR(ProfileOrderViolation)
NULLPLANE_ERROR(RepresentationMismatch)
NULLPLANE_ERROR(ScenarioError)

#undef NULLPLANE_ERROR

}  // namespace nullplane
