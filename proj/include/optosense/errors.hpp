#pragma once

#include <stdexcept>
#include <string>

namespace optosense {

/// Base class for every error raised by the library. Carries the name of the
/// module that raised it so the CLI can report a machine-readable origin.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string kind, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)), kind_(std::move(kind)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string module_;
  std::string kind_;
};

#define OPTOSENSE_DEFINE_ERROR(Name, Module)                                  \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& message) : Error(Module, #Name, message) {} \
  };

OPTOSENSE_DEFINE_ERROR(ParameterError, "model")
OPTOSENSE_DEFINE_ERROR(IntegratorConfigError, "dynamics")
OPTOSENSE_DEFINE_ERROR(DivergenceError, "dynamics")
OPTOSENSE_DEFINE_ERROR(StepFailure, "dynamics")
OPTOSENSE_DEFINE_ERROR(WindowError, "sensing")
OPTOSENSE_DEFINE_ERROR(NotStabilized, "sensing")
OPTOSENSE_DEFINE_ERROR(DomainError, "sensing")
OPTOSENSE_DEFINE_ERROR(NoInteriorMax, "sweeps")
OPTOSENSE_DEFINE_ERROR(SweepSpecError, "sweeps")
OPTOSENSE_DEFINE_ERROR(NoiseSpecError, "stochastic")
OPTOSENSE_DEFINE_ERROR(ConfigError, "cli-io")

#undef OPTOSENSE_DEFINE_ERROR

}  // namespace optosense
