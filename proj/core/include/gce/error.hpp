#pragma once

#include <stdexcept>

namespace gce {

// Error taxonomy, coarsest split that callers can act on:
//   SchemaError    structural problems (missing columns, duplicate names)
//   DataError      malformed or out-of-schema input values
//   ConfigError    caller mistakes (bad hyperparameters, bad flag values)
//   EstimatorError misuse of the gradient accumulator
//   SizeError      a requested computation is too large to enumerate
//   InternalError  broken invariants; always a bug in this library
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct EstimatorError : Error {
  using Error::Error;
};
struct SizeError : Error {
  using Error::Error;
};
struct InternalError : Error {
  using Error::Error;
};

} // namespace gce
