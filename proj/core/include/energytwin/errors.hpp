#pragma once

#include <stdexcept>
#include <string>

namespace energytwin {

// Every failure raised by the library derives from SimError so callers
// (the CLI in particular) can map it to a non-zero exit code.
class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ENERGYTWIN_ERROR(Name)               \
  class Name : public SimError {             \
   public:                                   \
    using SimError::SimError;                \
  }

// kernel
ENERGYTWIN_ERROR(UnsettledTick);
ENERGYTWIN_ERROR(StaleUpdate);
ENERGYTWIN_ERROR(DuplicateUpdate);
ENERGYTWIN_ERROR(UnknownTopic);
ENERGYTWIN_ERROR(UnknownAgent);

// physical models
ENERGYTWIN_ERROR(InvalidParameter);
ENERGYTWIN_ERROR(SimultaneousChargeDischarge);
ENERGYTWIN_ERROR(InfeasibleAction);

// forecasting
ENERGYTWIN_ERROR(InsufficientHistory);
ENERGYTWIN_ERROR(InsufficientSamples);
ENERGYTWIN_ERROR(UntrainedModel);

// planning
ENERGYTWIN_ERROR(InfeasibleLP);
ENERGYTWIN_ERROR(UnboundedLP);

// negotiation
ENERGYTWIN_ERROR(MissingResponse);

// metrics
ENERGYTWIN_ERROR(ZeroConsumption);
ENERGYTWIN_ERROR(EmptySeries);

// scenario runner
ENERGYTWIN_ERROR(ParseError);
ENERGYTWIN_ERROR(InvariantViolation);

#undef ENERGYTWIN_ERROR

/// Config validation failure; `field()` is the dotted path of the offending key.
class ValidationError : public SimError {
 public:
  ValidationError(std::string field, const std::string& what)
      : SimError(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace energytwin
