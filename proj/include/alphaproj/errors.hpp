#ifndef ALPHAPROJ_ERRORS_HPP
#define ALPHAPROJ_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace alphaproj {

enum class ErrorCode {
  InvalidMeasure,
  InvalidArgument,
  DomainError,
  DimensionMismatch,
  SingularPair,
  InadmissibleTheta,
  DegenerateDenominator,
  InfiniteTerm,
  NotInFamily,
  Infeasible,
  NotConverged,
  TooLarge,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularPair: return "SingularPair";
    case ErrorCode::InadmissibleTheta: return "InadmissibleTheta";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::InfiniteTerm: return "InfiniteTerm";
    case ErrorCode::NotInFamily: return "NotInFamily";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::TooLarge: return "TooLarge";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) throw Error(code, message);
}

}  // namespace alphaproj

#endif  // ALPHAPROJ_ERRORS_HPP
