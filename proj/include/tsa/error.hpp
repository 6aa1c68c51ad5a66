// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tsa {

enum class ErrorCode {
  MalformedHeader,
  RowCountMismatch,
  RowLengthMismatch,
  NonFiniteValue,
  EmptyLabels,
  BlankLabelLine,
  Io,
  InvalidArgument,
  DimensionMismatch,
  ZeroNormRow,
  NonPositiveEntry,
  EmptyTriplets,
  NonFiniteGradient,
  Divergence,
  SeparationUnreachable,
  MissingBackground,
  LengthMismatch,
  Internal,
};

const char *to_string(ErrorCode code) noexcept;

/// Library-wide exception. `code()` identifies the contract that was broken;
/// `what()` carries the human diagnostic (file, line, offset where known).
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace tsa
