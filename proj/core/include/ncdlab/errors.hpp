#pragma once

#include <stdexcept>
#include <string>

namespace ncdlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or out-of-range factor.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The request is well-formed but cannot be satisfied (too few bins, tuples...).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// A shape would leave the canvas. Never clipped silently.
class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class TrainingFailure : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Wraps an error raised inside one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace ncdlab
