#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bregproj/solver.hpp"

namespace bregproj {

/// Monte-Carlo aggregate of independent solver trials. Trial t uses RNG
/// stream t of the scheme's seed, so results do not depend on scheduling.
struct BatchResult {
    std::size_t trials = 0;
    int steps = 0;
    std::vector<double> mean_dc;          // E[D_C(x_k)], k = 0..steps
    std::vector<double> mean_step_ratio;  // E[D_C(x_{k+1}) / D_C(x_k) | D_C(x_k) > 0]
    std::vector<std::size_t> active;      // trials with D_C(x_k) > 0
    double mean_ratio = 0.0;              // pooled over every (trial, k) with D_C(x_k) > 0
    double mean_first_ratio = 0.0;        // E[D_C(x_1) / D_C(x_0)]
    std::size_t converged = 0;
};

/// Worker count: BREGPROJ_THREADS if set, otherwise the hardware concurrency.
unsigned default_thread_count();

/// Runs `trials` solves of at most `steps` iterations with D_C tracing.
BatchResult run_batch(const FeasibilityProblem& problem, const ControlScheme& scheme, std::size_t trials, int steps,
                      const SolveOptions& base = {}, unsigned threads = 0);

} // namespace bregproj
