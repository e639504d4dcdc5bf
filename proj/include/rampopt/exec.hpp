#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rampopt {

// Execution policy for the data-parallel kernels (multistart searches,
// kernel matrix assembly, pulse simulation, landscape grids). Parallel is
// bit-identical to Serial: iterations are independent, each seeds its own
// RNG stream, and reductions select by (value, index) instead of summing
// floating point across threads.
enum class Exec { Serial, Parallel };

template <typename Body>
void parallel_for(std::int64_t n, Exec exec, Body&& body) {
  if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) body(i);
  }
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace rampopt
