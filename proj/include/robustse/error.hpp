#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robustse {

enum class ErrorKind {
  // fitting
  RankDeficient,
  DegenerateSample,
  ControlsRankDeficient,
  BudgetExceeded,
  // variance estimation
  UnitLeverage,
  HadamardSingular,
  GramSingular,
  MissingTruth,
  // inference
  NonpositiveVariance,
  SingularOmega,
  IndefiniteOmega,
  // input handling
  InvalidArgument,
  FileNotFound,
  ParseError,
  UnknownColumn,
  MissingValue,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace robustse
