#include "robustse/error.hpp"

namespace robustse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::ControlsRankDeficient: return "ControlsRankDeficient";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::UnitLeverage: return "UnitLeverage";
    case ErrorKind::HadamardSingular: return "HadamardSingular";
    case ErrorKind::GramSingular: return "GramSingular";
    case ErrorKind::MissingTruth: return "MissingTruth";
    case ErrorKind::NonpositiveVariance: return "NonpositiveVariance";
    case ErrorKind::SingularOmega: return "SingularOmega";
    case ErrorKind::IndefiniteOmega: return "IndefiniteOmega";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::MissingValue: return "MissingValue";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

}  // namespace robustse
