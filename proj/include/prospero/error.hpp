#pragma once

#include <stdexcept>
#include <string>

namespace prospero {

enum class ErrorKind {
  EmptySequence,
  NonCanonicalResidue,
  LengthMismatch,
  PositionOutOfRange,
  PositionNotMasked,
  InsufficientData,
  DegenerateTargets,
  ZeroMaskCount,
  EmptyCorpus,
  MixedLengths,
  ExternalPriorUnavailable,
  ProtocolError,
  InvalidConfig,
  InvalidK,
  ParseError,
  UnknownSequence,
  NegativeVariance,
  ExhaustedSpace,
  EnumerationTooLarge,
  EmptyDataset,
  EmptyReference,
  LengthTooShort,
  BudgetExceeded,
  IoError,
};

/// Name of the error kind as it appears in messages and logs.
const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace prospero
