#ifndef MCCM_ERRORS_HPP
#define MCCM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mccm {

enum class ErrorCode {
  MeanNotOne,
  ConstantWeight,
  NegativeAtom,
  ZeroMoment,
  DegenerateModel,
  ConvergenceFailure,
  SeriesDiverges,
  AssumptionViolated,
  NotBoundary,
  DepthTooLarge,
  BadInterval,
  TooFewBlocks,
  ZeroField,
  RegimeMismatch,
  BadExponents,
  BadConfig,
  IOError,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mccm

#endif
