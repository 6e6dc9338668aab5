/// \file error.hpp
/// Typed error conditions.  Domain violations are never clamped silently:
/// every precondition failure throws an Error carrying a machine-checkable
/// condition code plus a human-readable message.

#pragma once

#include <stdexcept>
#include <string>

namespace hardynls {

enum class Errc {
  // Validation (CLI exit code 1): the request itself is malformed.
  InvalidDimension,   // d < 3
  InvalidPower,       // p outside (2, 2d/(d-2))
  InvalidCoupling,    // c outside [0, c_star]
  InvalidArgument,    // other domain violation (negative tolerance, t >= T, ...)
  ParamsMismatch,     // object built for different (d, p, c) than requested
  MassMismatch,       // profile mass does not match the required value
  MalformedCsv,       // unparseable CSV row / wrong column count
  NonMonotoneGrid,    // grid radii not strictly increasing
  ConfigError,        // bad key=value config file
  IoError,            // unreadable / unwritable path

  // Numerical failure (CLI exit code 2): valid request, computation failed.
  BracketInvalid,     // both bracket endpoints terminate with the same flag
  NoConvergence,      // iteration cap exceeded
  StepFailure,        // adaptive step size underflowed
  SolverDiverged,     // fixed-point residual grew
  NonDecrease,        // minimization quotient failed to decrease
  GridTooCoarse,      // finite differences dominate an identity residual
};

/// True for conditions that indicate a malformed request rather than a
/// numerical breakdown; the CLI maps these to exit code 1, the rest to 2.
constexpr bool is_validation_error(Errc c) {
  switch (c) {
    case Errc::InvalidDimension:
    case Errc::InvalidPower:
    case Errc::InvalidCoupling:
    case Errc::InvalidArgument:
    case Errc::ParamsMismatch:
    case Errc::MassMismatch:
    case Errc::MalformedCsv:
    case Errc::NonMonotoneGrid:
    case Errc::ConfigError:
    case Errc::IoError:
      return true;
    default:
      return false;
  }
}

constexpr const char* errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidDimension: return "InvalidDimension";
    case Errc::InvalidPower:     return "InvalidPower";
    case Errc::InvalidCoupling:  return "InvalidCoupling";
    case Errc::InvalidArgument:  return "InvalidArgument";
    case Errc::ParamsMismatch:   return "ParamsMismatch";
    case Errc::MassMismatch:     return "MassMismatch";
    case Errc::MalformedCsv:     return "MalformedCsv";
    case Errc::NonMonotoneGrid:  return "NonMonotoneGrid";
    case Errc::ConfigError:      return "ConfigError";
    case Errc::IoError:          return "IoError";
    case Errc::BracketInvalid:   return "BracketInvalid";
    case Errc::NoConvergence:    return "NoConvergence";
    case Errc::StepFailure:      return "StepFailure";
    case Errc::SolverDiverged:   return "SolverDiverged";
    case Errc::NonDecrease:      return "NonDecrease";
    case Errc::GridTooCoarse:    return "GridTooCoarse";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace hardynls
