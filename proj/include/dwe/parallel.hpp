#pragma once

#include <cstddef>
#include <string_view>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dwe {

/// Serial is the reference path; parallel must give bit-identical results.
enum class Execution { serial, parallel };

[[nodiscard]] inline std::string_view execution_name(Execution e) {
    return e == Execution::serial ? "serial" : "parallel";
}

[[nodiscard]] inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Calls f(i) for i in [0, n). Each index must write only its own output slot.
template <class F>
void for_each_index(std::size_t n, Execution ex, F&& f) {
    const auto count = static_cast<long long>(n);
    if (ex == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (long long i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
    } else {
        for (long long i = 0; i < count; ++i) f(static_cast<std::size_t>(i));
    }
}

}  // namespace dwe
