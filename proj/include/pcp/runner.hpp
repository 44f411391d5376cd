#pragma once

#include <string>

#include "pcp/config.hpp"

namespace pcp {

/// Exit codes shared by every command: 0 success, 2 config defect (thrown
/// as ConfigError before any compute), 3 every job failed, 4 some failed.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFailed = 3;
inline constexpr int kExitPartial = 4;

/// Worker pool size for a job set: min(jobs, PCP_WORKERS or the hardware
/// count). Always at least 1.
int worker_count(int jobs);

/// Condition-number sweep over the problem parameter; writes
/// cond_sweep.csv. Per-point failures become rows with an error column.
int cmd_cond_sweep(const ExperimentConfig& config);

/// Seeded training trials; writes train_trial<k>.csv per trial and
/// aggregate.json with mean/std of the final metrics. Linear problems run
/// one system, heat runs implicit stepping, burgers runs Newton.
int cmd_train(const ExperimentConfig& config);

/// Drop-tolerance ablation plus a "none" baseline row; writes ablation.csv.
int cmd_ablation(const ExperimentConfig& config);

/// Finite-difference check of the full parameter gradient chain; writes
/// gradcheck.json. Fails (exit 3) when the relative error crosses 1e-6.
int cmd_gradcheck(const ExperimentConfig& config);

}  // namespace pcp
