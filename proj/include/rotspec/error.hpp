#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rotspec {

enum class ErrorKind {
  InvalidInput,
  PrecisionExhausted,
  IndexOutOfRange,
  InsufficientTerms,
  InvalidOrder,
  EmptySpec,
  NonCanonicalSpec,
  NotHermitian,
  NotNormal,
  ConvergenceFailure,
  ThetaRational,
  ModelsNotNormal,
  EmptyCloud,
  ResourceBudgetExceeded,
  CertificateViolation,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InsufficientTerms: return "InsufficientTerms";
    case ErrorKind::InvalidOrder: return "InvalidOrder";
    case ErrorKind::EmptySpec: return "EmptySpec";
    case ErrorKind::NonCanonicalSpec: return "NonCanonicalSpec";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotNormal: return "NotNormal";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::ThetaRational: return "ThetaRational";
    case ErrorKind::ModelsNotNormal: return "ModelsNotNormal";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::ResourceBudgetExceeded: return "ResourceBudgetExceeded";
    case ErrorKind::CertificateViolation: return "CertificateViolation";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` carries the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rotspec
