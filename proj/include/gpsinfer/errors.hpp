#pragma once

#include <stdexcept>
#include <string>

namespace gpsinfer {

// Base class for all runtime failures raised by this library. Precondition
// violations (bad arguments) throw std::invalid_argument instead, so callers can
// distinguish "you called it wrong" from "the computation failed on this data".
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define GPSINFER_DEFINE_ERROR(NAME)                         \
  class NAME : public Error {                               \
   public:                                                  \
    explicit NAME(const std::string& msg) : Error(msg) {}   \
  }

// dataset
GPSINFER_DEFINE_ERROR(MissingColumn);
GPSINFER_DEFINE_ERROR(ParseError);
GPSINFER_DEFINE_ERROR(DuplicateId);
GPSINFER_DEFINE_ERROR(EmptyInput);
GPSINFER_DEFINE_ERROR(AllRowsTrimmed);

// learners
GPSINFER_DEFINE_ERROR(SingularDesign);

// gps
GPSINFER_DEFINE_ERROR(DegenerateExposure);
GPSINFER_DEFINE_ERROR(SchemaMismatch);
GPSINFER_DEFINE_ERROR(DegenerateSample);

// matching
GPSINFER_DEFINE_ERROR(EmptyGrid);
GPSINFER_DEFINE_ERROR(DegenerateStandardizer);

// balance
GPSINFER_DEFINE_ERROR(DegenerateVariance);

// tuner
GPSINFER_DEFINE_ERROR(NonNumericColumn);
GPSINFER_DEFINE_ERROR(AllAttemptsFailedConstruction);

// erf
GPSINFER_DEFINE_ERROR(NonConvergence);
GPSINFER_DEFINE_ERROR(DegenerateDesign);
GPSINFER_DEFINE_ERROR(AllBandwidthsDegenerate);

// cli / io
GPSINFER_DEFINE_ERROR(IoError);

#undef GPSINFER_DEFINE_ERROR

}  // namespace gpsinfer
