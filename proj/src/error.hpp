#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fg {

enum class ErrorCode {
  Parse,
  UnboundSymbol,
  Domain,
  Dimension,
  NearSingular,
  NoRealLogarithm,
  Integration,
  OutOfRange,
  Aperiodic,
  Config,
  InvalidArgument,
  NotFound,
  Convergence,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
      : Error(ErrorCode::Parse, what), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Raised when a matrix is too close to singular; carries the computed determinant
/// and, when known, the time at which it was evaluated.
class NearSingularError : public Error {
 public:
  NearSingularError(double det, double t, bool has_time, const std::string& what)
      : Error(ErrorCode::NearSingular, what), det_(det), t_(t), has_time_(has_time) {}
  double determinant() const noexcept { return det_; }
  bool has_time() const noexcept { return has_time_; }
  double time() const noexcept { return t_; }

 private:
  double det_;
  double t_;
  bool has_time_;
};

class IntegrationError : public Error {
 public:
  enum class Kind { StepUnderflow, NonFinite, MaxSteps };
  IntegrationError(Kind kind, double last_good_time, const std::string& what)
      : Error(ErrorCode::Integration, what), kind_(kind), last_good_(last_good_time) {}
  Kind kind() const noexcept { return kind_; }
  double last_good_time() const noexcept { return last_good_; }

 private:
  Kind kind_;
  double last_good_;
};

}  // namespace fg
