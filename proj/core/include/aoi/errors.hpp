#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

// Failure categories. Configuration/validation problems are distinguished from
// numerical failures so callers (the CLI in particular) can map them to
// different exit codes.
enum class Errc {
  OutOfRangeParameter,
  FractionSumMismatch,
  NonIntegerClassSize,
  NoEquilibrium,
  EpsilonOutOfRange,
  NoConvergence,
  CflViolation,
  MassDeficit,
  ClassMismatch,
  ParseError,
  ValidationError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::OutOfRangeParameter: return "OutOfRangeParameter";
    case Errc::FractionSumMismatch: return "FractionSumMismatch";
    case Errc::NonIntegerClassSize: return "NonIntegerClassSize";
    case Errc::NoEquilibrium: return "NoEquilibrium";
    case Errc::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::CflViolation: return "CflViolation";
    case Errc::MassDeficit: return "MassDeficit";
    case Errc::ClassMismatch: return "ClassMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
  }
  return "UnknownError";
}

// True for errors caused by bad inputs rather than by numerics giving up.
inline bool is_config_error(Errc c) {
  switch (c) {
    case Errc::NoEquilibrium:
    case Errc::NoConvergence:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace aoi
