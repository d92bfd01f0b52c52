#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace botflow {

/// Selects the OpenMP kernel or the serial reference it is tested against.
/// Both produce bit-identical results.
enum class Exec { serial, parallel };

inline int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline bool openmp_enabled() noexcept {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

/// Runs body(i) for i in [0, n). Iterations must be independent. The first
/// exception thrown (lowest index) is rethrown after the loop.
template <typename Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < count; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
        for (long long i = 0; i < count; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace botflow
