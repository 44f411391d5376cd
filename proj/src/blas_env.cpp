#include "pcp/blas_env.hpp"

#include <unistd.h>

#include <cstdlib>

namespace pcp {

void ensure_blas_env(char** argv) {
    if (std::getenv("PCP_BLAS_ENV_DONE")) return;
    ::setenv("PCP_BLAS_ENV_DONE", "1", 1);

    bool changed = false;
    if (!std::getenv("OPENBLAS_NUM_THREADS")) {
        ::setenv("OPENBLAS_NUM_THREADS", "1", 1);
        changed = true;
    }
#if defined(__x86_64__)
    if (!std::getenv("OPENBLAS_CORETYPE")) {
        if (__builtin_cpu_supports("avx512f")) {
            ::setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 1);
            changed = true;
        } else if (__builtin_cpu_supports("avx2") &&
                   __builtin_cpu_supports("fma")) {
            ::setenv("OPENBLAS_CORETYPE", "HASWELL", 1);
            changed = true;
        }
    }
#endif
    if (changed && argv && argv[0]) {
        ::execv("/proc/self/exe", argv);
        // exec failed; continue with whatever kernels the loader picked.
    }
}

}  // namespace pcp
