// Error kinds raised by the library and their CLI exit codes.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace siv {

enum class ErrorKind {
  RankDeficient,
  TooFewRows,
  NonPositiveVariance,
  DegenerateVariance,
  DegenerateDirection,
  EmptyGrid,
  DegenerateSample,
  NoEndogeneityDetected,
  AmbiguousSign,
  UnderIdentified,
  AllReplicationsFailed,
  FileNotFound,
  ParseError,
  InvalidInput,
};

// Library-wide exception. ParseError carries a 1-based line and column.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  Error(ErrorKind kind, const std::string& message, long line, long column);

  ErrorKind kind() const noexcept { return kind_; }
  long line() const noexcept { return line_; }
  long column() const noexcept { return column_; }

 private:
  ErrorKind kind_;
  long line_ = 0;
  long column_ = 0;
};

std::string_view error_name(ErrorKind kind) noexcept;

// Process exit code for an error kind. 0 is success, 1 is a usage error,
// 2 is an unexpected internal failure; library errors start at 10.
int exit_code(ErrorKind kind) noexcept;

}  // namespace siv
