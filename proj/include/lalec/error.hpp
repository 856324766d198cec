#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lalec {

enum class ErrorCode {
  MalformedJson,
  UnsupportedKeyword,
  InvalidSchema,
  ValidationFailed,
  MissingDefault,
  NoBaseObject,
  TooFewAlternatives,
  NotTrainable,
  NotTrained,
  UnresolvedChoice,
  ImplementationError,
  ConstraintTrap,
  ShapeMismatch,
  UnknownProperty,
  SyntaxError,
  UnknownOperator,
  UndefinedNonterminal,
  MissingStart,
  NotExpressible,
  EmptyAfterPruning,
  NoTerminatingAlternative,
  BlowupExceeded,
  UnsupportedNegation,
  UnsupportedDomain,
  EmptySpace,
  UnknownMarker,
  GridTooLarge,
  NoValidTrial,
  BadCsv,
  LabelColumnMissing,
  InvalidArgument,
  Io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Positioned error raised by the DSL and grammar front end.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : Error(ErrorCode::SyntaxError,
              std::to_string(line) + ":" + std::to_string(column) + ": " +
                  message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace lalec
