#pragma once

#include <cstdint>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace pomo {

inline int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline int current_thread() {
#if defined(_OPENMP)
    return omp_get_thread_num();
#else
    return 0;
#endif
}

// Runs body(i) for i in [0, n). threads <= 1 runs the plain serial loop,
// which is the reference path for determinism tests. The OpenMP path uses a
// static schedule so the work-to-thread assignment is a pure function of
// (n, threads).
template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& body) {
#if defined(_OPENMP)
    if (threads > 1 && n > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

// Same as parallel_for but also hands the body its worker index in
// [0, threads), e.g. for per-thread accumulation buffers.
template <typename Fn>
void parallel_for_workers(std::int64_t n, int threads, Fn&& body) {
#if defined(_OPENMP)
    if (threads > 1 && n > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t i = 0; i < n; ++i) body(i, omp_get_thread_num());
        return;
    }
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i, 0);
}

}  // namespace pomo
