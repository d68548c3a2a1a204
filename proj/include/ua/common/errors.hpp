#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ua {

// Base of every error thrown by the library. The CLI maps Error (and its
// subclasses) to exit code 1 and anything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StructuralError : public Error { using Error::Error; };
class DimensionError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class LengthError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class InputError : public Error { using Error::Error; };
class ParseError : public Error { using Error::Error; };
class SequenceError : public Error { using Error::Error; };
class ProtocolError : public Error { using Error::Error; };
class GenerationError : public Error { using Error::Error; };
class MeasurementError : public Error { using Error::Error; };

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

}  // namespace ua
