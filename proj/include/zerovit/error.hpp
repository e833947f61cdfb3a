#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace zerovit {

enum class ErrorKind {
  kUsage,
  kShape,
  kConfig,
  kMalformedJson,
  kMissingField,
  kInvariant,
  kNumeric,
  kInfeasible,
  kIo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by constrained sampling when no draw landed inside the parameter
// range. `nearest_miss` is the observed parameter count closest to the range.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& message, std::uint64_t nearest_miss)
      : Error(ErrorKind::kInfeasible, message), nearest_miss_(nearest_miss) {}

  std::uint64_t nearest_miss() const noexcept { return nearest_miss_; }

 private:
  std::uint64_t nearest_miss_;
};

}  // namespace zerovit
