#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pddid {

enum class ErrorCode {
  DimensionMismatch,
  RankDeficient,
  CollinearTrend,
  Separation,
  AllSameClass,
  EmptyCell,
  InconsistentArm,
  PermutationDegenerate,
  ConfigInvalid,
  SliceEmpty,
  MissingColumn,
  UnknownColumn,
  BadArmLabel,
  NonNumeric,
  NonFinite,
  IoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::CollinearTrend: return "CollinearTrend";
    case ErrorCode::Separation: return "Separation";
    case ErrorCode::AllSameClass: return "AllSameClass";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::InconsistentArm: return "InconsistentArm";
    case ErrorCode::PermutationDegenerate: return "PermutationDegenerate";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::SliceEmpty: return "SliceEmpty";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::BadArmLabel: return "BadArmLabel";
    case ErrorCode::NonNumeric: return "NonNumeric";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

/// Library-wide exception. `code()` identifies the failure condition so
/// callers can branch without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pddid
