#include "zerovit/error.hpp"

namespace zerovit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kMalformedJson: return "malformed-json";
    case ErrorKind::kMissingField: return "missing-field";
    case ErrorKind::kInvariant: return "invariant";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace zerovit
