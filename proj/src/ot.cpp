#include "bregproj/ot.hpp"

#include <cmath>
#include <string>

namespace bregproj {

void OtProblem::validate() const {
    if (static_cast<std::size_t>(cost.size()) != shape.size()) throw InvalidArgument("OT cost size does not match shape");
    if (!cost.allFinite()) throw InvalidArgument("OT cost must be finite");
    if (!(eta > 0.0)) throw InvalidArgument("OT regularization eta must be positive");
    if (marginals.size() != shape.order()) throw InvalidArgument("OT problem needs one marginal per axis");
    for (std::size_t i = 0; i < marginals.size(); ++i) {
        const Vector& r = marginals[i];
        if (static_cast<std::size_t>(r.size()) != shape.extent(i)) {
            throw InvalidArgument("marginal " + std::to_string(i) + " has the wrong length");
        }
        if (r.minCoeff() < 0.0 || std::abs(r.sum() - 1.0) > 1e-12) {
            throw InvalidArgument("marginal " + std::to_string(i) + " is not a probability vector");
        }
    }
}

std::vector<ConstraintSet> marginal_sets(const OtProblem& problem) {
    problem.validate();
    std::vector<ConstraintSet> sets;
    for (std::size_t i = 0; i < problem.shape.order(); ++i) {
        sets.emplace_back(OtMarginal{problem.shape, i, problem.marginals[i]}, static_cast<int>(i));
    }
    return sets;
}

std::vector<ConstraintSet> greenkhorn_sets(const OtProblem& problem) {
    problem.validate();
    std::vector<ConstraintSet> sets;
    int label = 0;
    for (std::size_t i = 0; i < problem.shape.order(); ++i) {
        const Matrix Ai = marginal_operator(problem.shape, i);
        for (Eigen::Index h = 0; h < Ai.rows(); ++h) {
            sets.emplace_back(Hyperplane{Ai.row(h).transpose(), problem.marginals[i][h]}, label++);
        }
    }
    return sets;
}

FeasibilityProblem to_feasibility(const OtProblem& problem, bool row_sets) {
    auto sets = row_sets ? greenkhorn_sets(problem) : marginal_sets(problem);
    const auto n = static_cast<Eigen::Index>(problem.shape.size());
    return FeasibilityProblem::make(LegendreFunction::boltzmann_shannon(n), std::move(sets), problem.kernel().values());
}

OtSolution solve_ot(const OtProblem& problem, const ControlScheme& scheme, const SolveOptions& opts, bool row_sets) {
    const auto fp = to_feasibility(problem, row_sets);
    auto trace = solve(fp, scheme, opts);
    CouplingTensor plan(problem.shape, trace.x_final);
    return {std::move(plan), std::move(trace)};
}

} // namespace bregproj
