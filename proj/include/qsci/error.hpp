#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsci {

/// Domain error kinds. The CLI reports these names verbatim.
enum class ErrorCode {
  MalformedHeader,
  IndexOutOfRange,
  NonNumericValue,
  EmptyInput,
  RankTooHigh,
  ZeroRank,
  TooLarge,
  DuplicateDeterminant,
  NoConvergence,
  EmptySelection,
  ShapeMismatch,
  ParamCountMismatch,
  TooManyQubits,
  EmptyPool,
  EmptySubspace,
  FullDepolarization,
  ZeroGap,
  UnknownFixture,
  InvalidArgument,
  ConfigParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RankTooHigh: return "RankTooHigh";
    case ErrorCode::ZeroRank: return "ZeroRank";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DuplicateDeterminant: return "DuplicateDeterminant";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ParamCountMismatch: return "ParamCountMismatch";
    case ErrorCode::TooManyQubits: return "TooManyQubits";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::EmptySubspace: return "EmptySubspace";
    case ErrorCode::FullDepolarization: return "FullDepolarization";
    case ErrorCode::ZeroGap: return "ZeroGap";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return to_string(code_); }

 private:
  ErrorCode code_;
};

/// Parse failures carry the 1-based line number of the offending input line.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t line, const std::string& what)
      : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qsci
