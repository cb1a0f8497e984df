#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ferrosyn {

enum class ErrorCode {
  // device_model
  OutOfCalibratedRange,
  PulseTooShort,
  OutOfRange,
  InvalidParameter,
  // device_physics
  DegenerateInput,
  // param_fitting
  InsufficientData,
  NonPositiveCurrent,
  NegativeDiscriminant,
  DegenerateFit,
  InsufficientSwitchingEvents,
  // snn_sim
  BadShape,
  DimensionMismatch,
  EmptyDataset,
  // data_io
  BadMagic,
  Truncated,
  SchemaMismatch,
  NonFinite,
  ParseError,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-readable code. Loaders never throw anything else on bad input.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by sequence simulations; remembers which schedule entry failed.
class ScheduleError : public Error {
 public:
  ScheduleError(const Error& cause, std::size_t index)
      : Error(cause.code(), "schedule index " + std::to_string(index) + ": " + cause.what()),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace ferrosyn
