#pragma once

#include <stdexcept>
#include <string>

namespace brt {

/// Base of every error raised by the library. `exit_code()` is the process
/// status the command-line front end reports for it.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code = 3)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

// Geometry
class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& w) : Error(w, 2) {}
};
class DegenerateAngleError : public Error {
 public:
  explicit DegenerateAngleError(const std::string& w) : Error(w, 2) {}
};
class InvalidGrid : public Error {
 public:
  explicit InvalidGrid(const std::string& w) : Error(w, 2) {}
};

// Data / model
class GridMismatch : public Error {
 public:
  explicit GridMismatch(const std::string& w) : Error(w, 3) {}
};
class NegativeImage : public Error {
 public:
  explicit NegativeImage(const std::string& w) : Error(w, 3) {}
};
class NegativeInput : public Error {
 public:
  explicit NegativeInput(const std::string& w) : Error(w, 3) {}
};
class ModelZeroWithData : public Error {
 public:
  explicit ModelZeroWithData(const std::string& w) : Error(w, 4) {}
};
class ZeroDenominator : public Error {
 public:
  explicit ZeroDenominator(const std::string& w) : Error(w, 4) {}
};
class UnsupportedShape : public Error {
 public:
  explicit UnsupportedShape(const std::string& w) : Error(w, 2) {}
};
class OutOfBounds : public Error {
 public:
  explicit OutOfBounds(const std::string& w) : Error(w, 2) {}
};

// Solver
class RootSolveFailure : public Error {
 public:
  explicit RootSolveFailure(const std::string& w) : Error(w, 4) {}
};
class MonotonicityViolation : public Error {
 public:
  explicit MonotonicityViolation(const std::string& w) : Error(w, 4) {}
};
class DegenerateOperator : public Error {
 public:
  explicit DegenerateOperator(const std::string& w) : Error(w, 4) {}
};

// Persistence / configuration
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& w) : Error(w, 2) {}
};
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& w) : Error(w, 3) {}
};
class IoError : public Error {
 public:
  explicit IoError(const std::string& w) : Error(w, 3) {}
};

}  // namespace brt
