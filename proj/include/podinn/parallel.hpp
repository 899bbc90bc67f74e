#pragma once

#include <cstdint>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace podinn {

/// True unless PODINN_SERIAL=1 forces the serial reference path.
inline bool parallel_enabled() {
    const char* env = std::getenv("PODINN_SERIAL");
    return env == nullptr || env[0] != '1';
}

inline int max_threads() {
#ifdef _OPENMP
    return parallel_enabled() ? omp_get_max_threads() : 1;
#else
    return 1;
#endif
}

/// Data-parallel loop over independent iterations. The serial path runs the
/// identical body in index order; since iterations are independent (or
/// reduced in fixed chunk order by the caller), both paths produce
/// bit-identical results.
template <class Body>
void parallel_for(std::int64_t n, const Body& body, bool force_serial = false) {
#ifdef _OPENMP
    if (!force_serial && parallel_enabled() && n > 1) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#else
    (void)force_serial;
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace podinn
