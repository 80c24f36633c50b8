#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace occr {

enum class Errc {
  InvalidArgument,
  NegativeAmount,
  MissingCloseDate,
  BorrowCapViolated,
  InvalidField,
  ParseError,
  SchemaVersionMismatch,
  SchemaError,
  ValidationError,
  DuplicateAsset,
  UnknownAsset,
  ZeroSigmaMax,
  NoEligibleLoans,
  NoTransactions,
  SingleLoan,
  InsufficientLoans,
  NoOpenPositions,
  ShapeTooSmall,
  ScaleOrderViolated,
  ThresholdOutOfRange,
  ScaleTooSmall,
  InsufficientSizes,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NegativeAmount: return "NegativeAmount";
    case Errc::MissingCloseDate: return "MissingCloseDate";
    case Errc::BorrowCapViolated: return "BorrowCapViolated";
    case Errc::InvalidField: return "InvalidField";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case Errc::SchemaError: return "SchemaError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::DuplicateAsset: return "DuplicateAsset";
    case Errc::UnknownAsset: return "UnknownAsset";
    case Errc::ZeroSigmaMax: return "ZeroSigmaMax";
    case Errc::NoEligibleLoans: return "NoEligibleLoans";
    case Errc::NoTransactions: return "NoTransactions";
    case Errc::SingleLoan: return "SingleLoan";
    case Errc::InsufficientLoans: return "InsufficientLoans";
    case Errc::NoOpenPositions: return "NoOpenPositions";
    case Errc::ShapeTooSmall: return "ShapeTooSmall";
    case Errc::ScaleOrderViolated: return "ScaleOrderViolated";
    case Errc::ThresholdOutOfRange: return "ThresholdOutOfRange";
    case Errc::ScaleTooSmall: return "ScaleTooSmall";
    case Errc::InsufficientSizes: return "InsufficientSizes";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Library-wide exception. `subject()` names the offending record (wallet,
/// loan, asset, file) when there is one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::string subject = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(std::move(message)),
        subject_(std::move(subject)) {}

  Errc code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
  std::string subject_;
};

}  // namespace occr
