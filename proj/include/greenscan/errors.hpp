#pragma once

#include <stdexcept>
#include <string>

namespace greenscan {

/// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define GREENSCAN_DEFINE_ERROR(Name)                                           \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

GREENSCAN_DEFINE_ERROR(FormatError);
GREENSCAN_DEFINE_ERROR(MetadataError);
GREENSCAN_DEFINE_ERROR(ValidationError);
GREENSCAN_DEFINE_ERROR(BoundsError);
GREENSCAN_DEFINE_ERROR(OutsideFootprintError);
GREENSCAN_DEFINE_ERROR(EmptyFootprintError);
GREENSCAN_DEFINE_ERROR(DegenerateScaleError);
GREENSCAN_DEFINE_ERROR(EmptyMaskError);
GREENSCAN_DEFINE_ERROR(UndefinedCorrelationError);
GREENSCAN_DEFINE_ERROR(SchemaError);
GREENSCAN_DEFINE_ERROR(SpecError);
GREENSCAN_DEFINE_ERROR(NoInputError);
GREENSCAN_DEFINE_ERROR(InsufficientDataError);
GREENSCAN_DEFINE_ERROR(PairingError);

#undef GREENSCAN_DEFINE_ERROR

} // namespace greenscan
