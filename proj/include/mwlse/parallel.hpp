#ifndef MWLSE_PARALLEL_HPP
#define MWLSE_PARALLEL_HPP

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mwlse {

// Runs body(i) for i in [0, n). threads <= 1 keeps the plain serial loop
// (the reference path); otherwise the iterations fan out over an OpenMP
// pool. Each body(i) must only write to its own slot, so results do not
// depend on the pool size.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
#ifdef _OPENMP
    if (threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            body(static_cast<std::size_t>(i));
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace mwlse

#endif
