#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eventrec {

enum class ErrorKind {
  InvalidRank,
  DegenerateInput,
  SingularSpace,
  DimensionMismatch,
  InvalidMatrix,
  UnknownEntity,
  InvalidWeight,
  MalformedInput,
  InvalidConfig,
  EmptyPreferences,
  UndefinedMetric,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures surface as this exception; kind() carries the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace eventrec
