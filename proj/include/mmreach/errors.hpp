#pragma once

#include <stdexcept>
#include <string>

namespace mmreach {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed scenarios, inverted intervals, invalid knobs.
// The CLI maps this family to exit code 2.
struct ValidationError : Error {
  using Error::Error;
};

// Mismatched vector/matrix dimensions anywhere in the pipeline.
struct DimensionError : ValidationError {
  using ValidationError::ValidationError;
};

// Model file failed to parse or violates the layer-dimension chain.
struct ModelParseError : ValidationError {
  using ValidationError::ValidationError;
};

// Numerical failures (CLI exit code 3).
struct IntegrationError : Error {
  using Error::Error;
};

// Trajectory left the representable range (non-finite state).
struct DivergenceError : IntegrationError {
  using IntegrationError::IntegrationError;
};

// The Lipschitz tube fixed point failed to stabilize.
struct TubeError : Error {
  using Error::Error;
};

// Reachability driver failure: unordered output box, degenerate facet,
// wrong embedding basis, tube/box inconsistency.
struct ReachError : Error {
  using Error::Error;
};

// Output file could not be written (CLI exit code 4).
struct IoError : Error {
  using Error::Error;
};

}  // namespace mmreach
