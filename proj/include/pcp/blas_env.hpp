#pragma once

namespace pcp {

/// Re-executes the current process once with OpenBLAS tuning variables set
/// (single thread for reproducibility, and an explicit core type because the
/// dispatcher misreads the masked CPU model in containers). OpenBLAS samples
/// these in its load-time constructor, before main runs, so setenv from main
/// is too late; call this first thing in main instead. No-op when the
/// variables are already set or the re-exec already happened.
void ensure_blas_env(char** argv);

}  // namespace pcp
