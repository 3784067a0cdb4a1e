#include "siv/error.hpp"

namespace siv {

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

Error::Error(ErrorKind kind, const std::string& message, long line, long column)
    : std::runtime_error(message), kind_(kind), line_(line), column_(column) {}

std::string_view error_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::DegenerateDirection: return "DegenerateDirection";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::NoEndogeneityDetected: return "NoEndogeneityDetected";
    case ErrorKind::AmbiguousSign: return "AmbiguousSign";
    case ErrorKind::UnderIdentified: return "UnderIdentified";
    case ErrorKind::AllReplicationsFailed: return "AllReplicationsFailed";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RankDeficient: return 10;
    case ErrorKind::TooFewRows: return 11;
    case ErrorKind::NonPositiveVariance: return 12;
    case ErrorKind::DegenerateVariance: return 13;
    case ErrorKind::DegenerateDirection: return 14;
    case ErrorKind::EmptyGrid: return 15;
    case ErrorKind::DegenerateSample: return 16;
    case ErrorKind::NoEndogeneityDetected: return 17;
    case ErrorKind::AmbiguousSign: return 18;
    case ErrorKind::UnderIdentified: return 19;
    case ErrorKind::AllReplicationsFailed: return 20;
    case ErrorKind::FileNotFound: return 21;
    case ErrorKind::ParseError: return 22;
    case ErrorKind::InvalidInput: return 23;
  }
  return 2;
}

}  // namespace siv
