#pragma once

#include <cstddef>

namespace runlab {

// Execution mode for the data-parallel kernels. Every parallel kernel has the
// serial path as its reference implementation; results are bit-identical
// because each index writes its own slot and per-slot arithmetic is ordered.
enum class Exec { serial, parallel };

template <class F>
void par_for(std::size_t n, Exec mode, F&& f) {
  if (mode == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      f(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) f(i);
  }
}

}  // namespace runlab
