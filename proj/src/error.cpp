// SPDX-License-Identifier: Apache-2.0
#include "tsa/error.hpp"

namespace tsa {

const char *to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::MalformedHeader: return "MalformedHeader";
  case ErrorCode::RowCountMismatch: return "RowCountMismatch";
  case ErrorCode::RowLengthMismatch: return "RowLengthMismatch";
  case ErrorCode::NonFiniteValue: return "NonFiniteValue";
  case ErrorCode::EmptyLabels: return "EmptyLabels";
  case ErrorCode::BlankLabelLine: return "BlankLabelLine";
  case ErrorCode::Io: return "Io";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::ZeroNormRow: return "ZeroNormRow";
  case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
  case ErrorCode::EmptyTriplets: return "EmptyTriplets";
  case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
  case ErrorCode::Divergence: return "Divergence";
  case ErrorCode::SeparationUnreachable: return "SeparationUnreachable";
  case ErrorCode::MissingBackground: return "MissingBackground";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

} // namespace tsa
