#pragma once

#include <stdexcept>
#include <string>

namespace pcsim {

enum class ErrorCode {
  ZeroMass,
  InvalidMass,
  InvalidDimension,
  DegenerateAxis,
  Finalized,
  UnknownBody,
  UnknownJoint,
  CycleWouldForm,
  SameSegment,
  ZeroAxis,
  EmptyRobot,
  NumericalBlowup,
  ParseError,
  IoError,
  CorruptCheckpoint,
};

inline const char* toString(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::InvalidMass: return "InvalidMass";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::DegenerateAxis: return "DegenerateAxis";
    case ErrorCode::Finalized: return "Finalized";
    case ErrorCode::UnknownBody: return "UnknownBody";
    case ErrorCode::UnknownJoint: return "UnknownJoint";
    case ErrorCode::CycleWouldForm: return "CycleWouldForm";
    case ErrorCode::SameSegment: return "SameSegment";
    case ErrorCode::ZeroAxis: return "ZeroAxis";
    case ErrorCode::EmptyRobot: return "EmptyRobot";
    case ErrorCode::NumericalBlowup: return "NumericalBlowup";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
  }
  return "Unknown";
}

class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(toString(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pcsim
