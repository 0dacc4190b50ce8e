#pragma once

#include <stdexcept>
#include <string>

namespace fbllab {

enum class ErrorCode {
  InvalidWeight,
  InvalidExponent,
  DimensionTooLarge,
  DimensionMismatch,
  NonCountingMeasure,
  SyntaxError,
  UnknownGenerator,
  ArityMismatch,
  DegenerateWitness,
  ZeroOperator,
  InvalidSpace,
  InvalidLattice,
  SimplexViolation,
  NumericalInstability,
  CoverInvalid,
  NegativeInput,
  DegenerateGauge,
  ScaleViolation,
  PositivityViolation,
  NotDisjoint,
  ConstantRefuted,
  DegenerateFunctional,
  InvalidArgument,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonCountingMeasure: return "NonCountingMeasure";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::DegenerateWitness: return "DegenerateWitness";
    case ErrorCode::ZeroOperator: return "ZeroOperator";
    case ErrorCode::InvalidSpace: return "InvalidSpace";
    case ErrorCode::InvalidLattice: return "InvalidLattice";
    case ErrorCode::SimplexViolation: return "SimplexViolation";
    case ErrorCode::NumericalInstability: return "NumericalInstability";
    case ErrorCode::CoverInvalid: return "CoverInvalid";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::DegenerateGauge: return "DegenerateGauge";
    case ErrorCode::ScaleViolation: return "ScaleViolation";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::NotDisjoint: return "NotDisjoint";
    case ErrorCode::ConstantRefuted: return "ConstantRefuted";
    case ErrorCode::DegenerateFunctional: return "DegenerateFunctional";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fbllab
