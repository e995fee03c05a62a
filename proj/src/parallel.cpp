#include "soar/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace soar {

namespace {

int read_cap() {
    const char* env = std::getenv("SOAR_THREADS");
    if (env == nullptr) return 0;
    try {
        const int n = std::stoi(env);
        return n > 0 ? n : 0;
    } catch (...) {
        return 0;
    }
}

} // namespace

int max_threads() {
    static const int cap = read_cap();
    if (cap == 0) return omp_get_max_threads();
    return cap < omp_get_max_threads() ? cap : omp_get_max_threads();
}

} // namespace soar
