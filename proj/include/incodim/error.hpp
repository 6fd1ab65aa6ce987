#pragma once

#include <stdexcept>
#include <string>

namespace incodim {

enum class ErrorCode {
  BlochOutOfBall,
  DimensionMismatch,
  NotHermitian,
  InvalidState,
  InvalidEffect,
  InvalidObservable,
  InvalidStochastic,
  NotTracePreserving,
  ParamOutOfRange,
  TooLarge,
  NonConvergent,
  EmptySet,
  NotOrthonormal,
  CommutingProjections,
  NotIncompatible,
  SingularDirection,
  NoSolution,
  CompatiblePair,
  NonMonotoneWitness,
  DegenerateChord,
  ShapeMismatch,
  DegenerateBlock,
  PreconditionViolated,
  NotFound,
  Ambiguous,
  ParseError,
};

const char* to_string(ErrorCode c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace incodim
