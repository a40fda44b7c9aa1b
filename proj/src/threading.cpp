#include "ecgunc/threading.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecgunc {

namespace {
int g_threads = -1; // -1 = not initialized
}

void set_threads(int n) {
    if (n <= 0) {
        if (const char* env = std::getenv("ECG_UNC_THREADS")) {
            n = std::atoi(env);
        }
    }
#ifdef _OPENMP
    if (n <= 0) n = omp_get_max_threads();
    omp_set_num_threads(n);
#else
    n = 1;
#endif
    g_threads = n;
}

int threads() {
    if (g_threads < 0) set_threads(0);
    return g_threads;
}

bool parallel_enabled() {
#ifdef _OPENMP
    return threads() > 1;
#else
    return false;
#endif
}

} // namespace ecgunc
