#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace contractc {

/// Stable, machine-readable failure classes. The string names returned by
/// `error_code_name` are part of the CLI output format and must not change.
enum class ErrorCode {
  Parse,
  UnknownOperator,
  Type,
  UnboundVariable,
  UnboundTemplateVariable,
  MissingObservable,
  SortMismatch,
  DivisionByZero,
  ReductionStuck,
  UnsupportedAcc,
  UnsupportedLet,
  UnsupportedVar,
  UnknownOp,
  MissingDiscount,
  Schema,
  DuplicateKey,
  Io,
  UnknownBackend,
  InvalidConfig,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::UnknownOperator: return "unknown_operator";
    case ErrorCode::Type: return "type_error";
    case ErrorCode::UnboundVariable: return "unbound_variable";
    case ErrorCode::UnboundTemplateVariable: return "unbound_template_variable";
    case ErrorCode::MissingObservable: return "missing_observable";
    case ErrorCode::SortMismatch: return "sort_mismatch";
    case ErrorCode::DivisionByZero: return "division_by_zero";
    case ErrorCode::ReductionStuck: return "reduction_stuck";
    case ErrorCode::UnsupportedAcc: return "unsupported_acc";
    case ErrorCode::UnsupportedLet: return "unsupported_let";
    case ErrorCode::UnsupportedVar: return "unsupported_var";
    case ErrorCode::UnknownOp: return "unknown_op";
    case ErrorCode::MissingDiscount: return "missing_discount";
    case ErrorCode::Schema: return "schema_error";
    case ErrorCode::DuplicateKey: return "duplicate_key";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::UnknownBackend: return "unknown_backend";
    case ErrorCode::InvalidConfig: return "invalid_config";
  }
  return "unknown";
}

/// The single error channel of the toolkit. Every partial operation reports
/// failure by throwing this type; nothing else is thrown on domain errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string code_name() const { return std::string(error_code_name(code_)); }

 private:
  ErrorCode code_;
};

/// Parse failures carry the 1-based source position.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& message, int line, int column)
      : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " +
                        message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace contractc
