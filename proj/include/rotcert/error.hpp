#pragma once

#include <stdexcept>
#include <string>

namespace rotcert {

enum class ErrorCode {
  Validation = 1,
  Dimension,
  DegenerateSet,
  Config,
  Parse,
  Order,
  Unsupported,
  Parameter,
  OutOfRegime,
  NoNontrivialEta,
  InfiniteBound,
  VacuousBound,
  EmptySupport,
  RoundingFailure,
  DeskScaleExceeded,
  Io,
  Usage,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Carries beta_max when a coefficient request falls outside its regime.
class OutOfRegimeError : public Error {
 public:
  OutOfRegimeError(double beta_max, const std::string& what)
      : Error(ErrorCode::OutOfRegime, what), beta_max_(beta_max) {}
  double beta_max() const noexcept { return beta_max_; }

 private:
  double beta_max_;
};

}  // namespace rotcert
