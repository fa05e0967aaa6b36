#pragma once

#include <stdexcept>
#include <string>

namespace flare {

// Base class for every error raised by the library. Each concrete kind gets
// its own type so callers (and the CLI exit-code mapping) can discriminate.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define FLARE_DEFINE_ERROR(Name)    \
  struct Name : Error {             \
    using Error::Error;             \
  }

// Models and inputs
FLARE_DEFINE_ERROR(InvalidNet);
FLARE_DEFINE_ERROR(NonIntegerInterval);
FLARE_DEFINE_ERROR(InvalidArgument);
FLARE_DEFINE_ERROR(ParseError);

// Resource caps
FLARE_DEFINE_ERROR(StateSpaceOverflow);

// Ranking
FLARE_DEFINE_ERROR(EmptyTrace);
FLARE_DEFINE_ERROR(UnknownTransition);
FLARE_DEFINE_ERROR(DimensionMismatch);
FLARE_DEFINE_ERROR(NotADistribution);

// Test beds
FLARE_DEFINE_ERROR(InfeasibleSpec);
FLARE_DEFINE_ERROR(InfeasibleTopology);

// HMM and diagnosis
FLARE_DEFINE_ERROR(BadObservationIndex);
FLARE_DEFINE_ERROR(ZeroProbabilitySequence);
FLARE_DEFINE_ERROR(OutOfRange);
FLARE_DEFINE_ERROR(DegenerateRates);
FLARE_DEFINE_ERROR(TooShort);
FLARE_DEFINE_ERROR(LengthMismatch);
FLARE_DEFINE_ERROR(MissingDiagnosis);

#undef FLARE_DEFINE_ERROR

}  // namespace flare
