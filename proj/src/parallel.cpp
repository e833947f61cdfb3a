#include "zerovit/parallel.hpp"

#include <cstdlib>
#include <string>

namespace zerovit {

std::size_t default_jobs() {
  if (const char* env = std::getenv("ZEROVIT_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace zerovit
