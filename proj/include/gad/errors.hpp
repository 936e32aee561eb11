#pragma once

#include <stdexcept>
#include <string>

namespace gad {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ingest
struct EmptyInput : Error {
  using Error::Error;
};
struct NonMonotonicTime : Error {
  using Error::Error;
};
struct DuplicateSatellite : Error {
  using Error::Error;
};

// stats
struct EmptyWindow : Error {
  using Error::Error;
};

// detector
struct SeriesTooShort : Error {
  using Error::Error;
};
struct OutOfOrderEpoch : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};

// calibrate
struct EmptyClass : Error {
  using Error::Error;
};

// synth
struct InvalidSpec : Error {
  using Error::Error;
};

}  // namespace gad
