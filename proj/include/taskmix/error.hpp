#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taskmix {

enum class ErrorCode {
  // registry / data
  MissingFile,
  DuplicateTask,
  EmptySplit,
  MalformedRecord,
  OverlappingSplits,
  InvalidTaskSpec,
  EmptyInput,
  WrongModality,
  NoTasks,
  // samplers
  EmptyTaskSet,
  ZeroSize,
  InvalidTemperature,
  InvalidCap,
  InvalidWeights,
  WeightsMismatch,
  // taxonomy / curriculum
  RuleNotApplicable,
  MissingTask,
  NegativeEpochs,
  InvalidThreshold,
  EmptyCurve,
  // trainer / metrics
  UnknownTask,
  EmptyDev,
  PlanMismatch,
  MixedScales,
  EmptyInputList,
  // config / cli
  InvalidConfig,
  UnsupportedMethod,
  Unwritable,
  Internal,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::DuplicateTask: return "DuplicateTask";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::OverlappingSplits: return "OverlappingSplits";
    case ErrorCode::InvalidTaskSpec: return "InvalidTaskSpec";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::WrongModality: return "WrongModality";
    case ErrorCode::NoTasks: return "NoTasks";
    case ErrorCode::EmptyTaskSet: return "EmptyTaskSet";
    case ErrorCode::ZeroSize: return "ZeroSize";
    case ErrorCode::InvalidTemperature: return "InvalidTemperature";
    case ErrorCode::InvalidCap: return "InvalidCap";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::WeightsMismatch: return "WeightsMismatch";
    case ErrorCode::RuleNotApplicable: return "RuleNotApplicable";
    case ErrorCode::MissingTask: return "MissingTask";
    case ErrorCode::NegativeEpochs: return "NegativeEpochs";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
    case ErrorCode::EmptyCurve: return "EmptyCurve";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::EmptyDev: return "EmptyDev";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::MixedScales: return "MixedScales";
    case ErrorCode::EmptyInputList: return "EmptyInputList";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnsupportedMethod: return "UnsupportedMethod";
    case ErrorCode::Unwritable: return "Unwritable";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

/// Process exit codes used by the command line runner.
enum class ExitCode : int { Ok = 0, Config = 1, Data = 2, Internal = 3 };

inline ExitCode exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile:
    case ErrorCode::DuplicateTask:
    case ErrorCode::EmptySplit:
    case ErrorCode::MalformedRecord:
    case ErrorCode::OverlappingSplits:
    case ErrorCode::InvalidTaskSpec:
    case ErrorCode::EmptyInput:
    case ErrorCode::WrongModality:
    case ErrorCode::NoTasks:
    case ErrorCode::EmptyDev:
      return ExitCode::Data;
    case ErrorCode::Internal:
    case ErrorCode::Unwritable:
      return ExitCode::Internal;
    default:
      return ExitCode::Config;
  }
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace taskmix
