#pragma once

#include <cstdint>
#include <vector>

#include "trajlab/denoiser.hpp"
#include "trajlab/guidance.hpp"
#include "trajlab/scenario.hpp"
#include "trajlab/schedule.hpp"

namespace trajlab {

struct ScheduleParams {
    int t_base = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    int infer_count = 50;
};

struct RunConfig {
    ScheduleParams schedule;
    StrategyConfig strategy;
    int n_samples = 1;
    std::uint64_t seed = 0;
    bool record_trajectory = false;
};

struct RunResult {
    std::vector<std::vector<double>> finals;  // n_samples x latent size
    // Per sample: S + 1 latents from z_T down to z_0 (recorded only on request).
    std::vector<std::vector<std::vector<double>>> trajectories;
    CallCounter calls;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
};

// Full S-step denoising loop for any strategy. Deterministic per (cfg, seed);
// sample j draws from substream (seed, j) so results are independent of
// n_samples and execution order.
RunResult run_sampling(const Scenario& scenario, const RunConfig& cfg);

}  // namespace trajlab
