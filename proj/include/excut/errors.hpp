#pragma once

#include <stdexcept>
#include <string>

namespace excut {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EXCUT_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// Measure spaces and games.
EXCUT_DEFINE_ERROR(InvalidMeasure);
EXCUT_DEFINE_ERROR(InvalidSystem);
EXCUT_DEFINE_ERROR(InvalidPartition);
EXCUT_DEFINE_ERROR(EmptySubset);
EXCUT_DEFINE_ERROR(UnclockedTrace);
EXCUT_DEFINE_ERROR(TooManyElements);

// Geometry and trees.
EXCUT_DEFINE_ERROR(DuplicateCenters);
EXCUT_DEFINE_ERROR(NonFiniteInput);
EXCUT_DEFINE_ERROR(ShapeMismatch);
EXCUT_DEFINE_ERROR(DegenerateSystem);
EXCUT_DEFINE_ERROR(CutLimitExceeded);
EXCUT_DEFINE_ERROR(ReductionMismatch);

// Reference centers.
EXCUT_DEFINE_ERROR(TooFewDistinctPoints);

// Bound checks.
EXCUT_DEFINE_ERROR(NonPositiveRate);
EXCUT_DEFINE_ERROR(NonPositiveMass);
EXCUT_DEFINE_ERROR(ElementNotInS1);
EXCUT_DEFINE_ERROR(ZeroOptimal);

// Input files.
EXCUT_DEFINE_ERROR(ParseError);

#undef EXCUT_DEFINE_ERROR

}  // namespace excut
