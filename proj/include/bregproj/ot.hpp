#pragma once

#include <vector>

#include "bregproj/solver.hpp"
#include "bregproj/tensor.hpp"

namespace bregproj {

/// Entropic multimarginal transport: pi* = argmin KL(pi, kappa) subject to
/// marginal(pi, i) = rho_i for every axis, with kappa = exp(-cost / eta).
struct OtProblem {
    TensorShape shape;
    Vector cost; // row-major, same shape
    double eta = 1.0;
    std::vector<Vector> marginals;

    void validate() const;
    [[nodiscard]] CouplingTensor kernel() const { return gibbs_kernel(shape, cost, eta); }
};

/// One full-marginal set per axis.
std::vector<ConstraintSet> marginal_sets(const OtProblem& problem);

/// One hyperplane per scalar marginal equation (sum_i n_i sets): the 0/1
/// indicator of the slice {axis i = h} against rho_{i,h}.
std::vector<ConstraintSet> greenkhorn_sets(const OtProblem& problem);

/// Boltzmann-Shannon feasibility problem started at the Gibbs kernel.
FeasibilityProblem to_feasibility(const OtProblem& problem, bool row_sets);

struct OtSolution {
    CouplingTensor plan;
    IterationTrace trace;
};

/// Bregman projections over the marginal sets (or the single-row sets when
/// row_sets is true). Greedy control over two full marginals is Sinkhorn;
/// greedy control over the row sets is Greenkhorn.
OtSolution solve_ot(const OtProblem& problem, const ControlScheme& scheme, const SolveOptions& opts = {},
                    bool row_sets = false);

} // namespace bregproj
