#pragma once

#include <omp.h>

#include <cstdlib>
#include <string>

namespace kryreg {

/// Environment variable capping the number of workers used by the kernel
/// products. Unset or invalid means all available hardware threads.
inline constexpr const char* kThreadsEnvVar = "KRYREG_NUM_THREADS";

inline int worker_count() {
  static const int count = [] {
    if (const char* env = std::getenv(kThreadsEnvVar)) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end != env && v > 0) return static_cast<int>(v);
    }
    return omp_get_max_threads();
  }();
  return count;
}

}  // namespace kryreg
