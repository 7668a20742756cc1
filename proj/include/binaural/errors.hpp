// errors.hpp
// Error taxonomy. Two families map onto the CLI exit codes: precondition
// violations (bad inputs, exit code 2) and numerical degeneracies discovered
// during computation (exit code 3).

#ifndef BINAURAL_ERRORS_HPP
#define BINAURAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace binaural {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller handed us something invalid.
struct PreconditionError : Error {
  using Error::Error;
};

// Inputs were formally valid but the computation is numerically degenerate.
struct DegeneracyError : Error {
  using Error::Error;
};

#define BINAURAL_DEFINE_ERROR(Name, Base) \
  struct Name : Base {                    \
    using Base::Base;                     \
  }

BINAURAL_DEFINE_ERROR(DimensionMismatch, PreconditionError);
BINAURAL_DEFINE_ERROR(InvalidGeometry, PreconditionError);
BINAURAL_DEFINE_ERROR(ParseError, PreconditionError);
BINAURAL_DEFINE_ERROR(ChannelMismatch, PreconditionError);
BINAURAL_DEFINE_ERROR(EmptyDatabase, PreconditionError);
BINAURAL_DEFINE_ERROR(SilentComponent, PreconditionError);
BINAURAL_DEFINE_ERROR(TooShort, PreconditionError);
BINAURAL_DEFINE_ERROR(ConfigMismatch, PreconditionError);
BINAURAL_DEFINE_ERROR(LengthMismatch, PreconditionError);
BINAURAL_DEFINE_ERROR(UnsupportedFormat, PreconditionError);
BINAURAL_DEFINE_ERROR(InsufficientFrames, PreconditionError);
BINAURAL_DEFINE_ERROR(ZeroAtf, PreconditionError);
BINAURAL_DEFINE_ERROR(ZeroDenominator, PreconditionError);
BINAURAL_DEFINE_ERROR(ZeroPowerChannel, PreconditionError);
BINAURAL_DEFINE_ERROR(ZeroDelta, PreconditionError);
BINAURAL_DEFINE_ERROR(ZeroBeta, PreconditionError);
BINAURAL_DEFINE_ERROR(ZeroReferenceEntry, PreconditionError);
BINAURAL_DEFINE_ERROR(EtaOneDeltaNotOne, PreconditionError);
BINAURAL_DEFINE_ERROR(NonFiniteInput, PreconditionError);

BINAURAL_DEFINE_ERROR(NotPositiveDefinite, DegeneracyError);
BINAURAL_DEFINE_ERROR(NoConvergence, DegeneracyError);
BINAURAL_DEFINE_ERROR(DegenerateConstraints, DegeneracyError);

#undef BINAURAL_DEFINE_ERROR

}  // namespace binaural

#endif
