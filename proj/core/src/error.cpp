#include "eventrec/error.hpp"

namespace eventrec {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidRank: return "InvalidRank";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::SingularSpace: return "SingularSpace";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::UnknownEntity: return "UnknownEntity";
    case ErrorKind::InvalidWeight: return "InvalidWeight";
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::EmptyPreferences: return "EmptyPreferences";
    case ErrorKind::UndefinedMetric: return "UndefinedMetric";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace eventrec
