#include "exitlab/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace exitlab::parallel {

int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_worker_count(int workers) {
    if (workers < 1) return;
#ifdef _OPENMP
    omp_set_num_threads(workers);
#endif
}

int apply_worker_cap_from_env() {
    if (const char* raw = std::getenv(kWorkerCapVariable)) {
        try {
            const int cap = std::stoi(raw);
            if (cap >= 1) set_worker_count(std::min(cap, worker_count()));
        } catch (const std::exception&) {
            // ignore malformed values
        }
    }
    return worker_count();
}

}  // namespace exitlab::parallel
