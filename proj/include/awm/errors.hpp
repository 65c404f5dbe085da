#pragma once

#include <stdexcept>
#include <string>

namespace awm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Action grammar.
struct ParseError : Error {
  using Error::Error;
};
struct UnknownActionError : Error {
  using Error::Error;
};
struct ArityError : Error {
  using Error::Error;
};

// Record (de)serialization.
struct SchemaError : Error {
  using Error::Error;
};

// Workflow text format.
struct HeaderError : Error {
  using Error::Error;
};
struct EmptyBodyError : Error {
  using Error::Error;
};
struct MinStepsError : Error {
  using Error::Error;
};

// Induction.
struct OversizeExperienceError : Error {
  using Error::Error;
};

// Memory store.
struct ModeError : Error {
  using Error::Error;
};

// LM clients.
struct LmError : Error {
  explicit LmError(const std::string& what, int batch_index = -1)
      : Error(what), batch_index(batch_index) {}
  int batch_index;  // set when the failure belongs to a specific prompt batch
};
struct TransportError : LmError {
  using LmError::LmError;
};
struct RateLimitedError : LmError {
  using LmError::LmError;
};
struct BadResponseError : LmError {
  using LmError::LmError;
};
struct ScriptExhaustedError : LmError {
  using LmError::LmError;
};

// Agent.
struct NoActionError : Error {
  using Error::Error;
};
struct UnboundPlaceholderError : Error {
  using Error::Error;
};

// Simulated environment.
struct UnknownTaskError : Error {
  using Error::Error;
};
struct EnvError : Error {
  using Error::Error;
};

}  // namespace awm
