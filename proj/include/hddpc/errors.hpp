#pragma once

#include <stdexcept>
#include <string>

namespace hddpc {

enum class ErrorKind {
  TrajectoryTooShort,
  EmptyCollection,
  OutOfRange,
  ShapeMismatch,
  MissingTransitionData,
  RankDeficientBasis,
  OutOfDomain,
  SingularOrbit,
  InsufficientHistory,
  MissingHankel,
  SolverFailed,
  InfeasibleBeyondTolerance,
  CollectionFellOver,
  ConfigError,
  IoError,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::TrajectoryTooShort: return "TrajectoryTooShort";
    case ErrorKind::EmptyCollection: return "EmptyCollection";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::MissingTransitionData: return "MissingTransitionData";
    case ErrorKind::RankDeficientBasis: return "RankDeficientBasis";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::SingularOrbit: return "SingularOrbit";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::MissingHankel: return "MissingHankel";
    case ErrorKind::SolverFailed: return "SolverFailed";
    case ErrorKind::InfeasibleBeyondTolerance: return "InfeasibleBeyondTolerance";
    case ErrorKind::CollectionFellOver: return "CollectionFellOver";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hddpc
