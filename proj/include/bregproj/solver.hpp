#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "bregproj/controls.hpp"
#include "bregproj/geometry.hpp"
#include "bregproj/legendre.hpp"

namespace bregproj {

/// Find x in C = C_1 ∩ ... ∩ C_m by iterated Bregman projections from x0.
struct FeasibilityProblem {
    LegendreFunction f;
    std::vector<ConstraintSet> sets;
    std::optional<GeneralAffine> intersection; // stacked (A, b) for D_C diagnostics
    Vector x0;

    /// Builds the problem and, when every set is affine, the stacked
    /// intersection.
    static FeasibilityProblem make(LegendreFunction f, std::vector<ConstraintSet> sets, Vector x0);

    [[nodiscard]] bool all_affine() const;
    void validate() const;
};

struct SolveOptions {
    int max_iterations = 10000;
    double stop_residual = 1e-8; // on max_i ||A_i x - b_i||_inf
    int trace_every = 1;
    bool compute_dc_trace = false;
    bool keep_iterates = false;
    DualSolveOptions dual;

    void validate() const;
};

/// State of step k: the iterate x_k, the chosen set xi_k and what the step removed.
struct TraceRecord {
    int k = 0;
    int xi = 0;
    double d_sel = 0.0;     // D_{C_xi}(x_k)
    double residual = 0.0;  // max_i ||A_i x_k - b_i||_inf
    std::optional<double> dc; // D_C(x_k)
    double t_ms = 0.0;
};

enum class SolveStatus { converged, budget_exhausted };

std::string_view to_string(SolveStatus status);

struct IterationTrace {
    std::vector<TraceRecord> records;
    std::vector<Vector> iterates; // x_0 .. x_final when keep_iterates is set
    Vector x_final;
    SolveStatus status = SolveStatus::budget_exhausted;
    int iterations = 0;
    double final_residual = 0.0;
    std::optional<double> final_dc;

    /// D_C(x_0), D_C(x_1), ..., D_C(x_final) when every step was traced.
    [[nodiscard]] std::vector<double> dc_sequence() const;
};

/// A projection failed inside a solver run.
class SolveError : public Error {
public:
    SolveError(int step, const std::string& what);
    [[nodiscard]] int step() const noexcept { return step_; }

private:
    int step_;
};

IterationTrace solve(const FeasibilityProblem& problem, const ControlScheme& scheme, const SolveOptions& opts = {},
                     std::uint64_t stream = 0);

/// P_C(x0) for an affine family; the point every affine run converges to.
Vector fixed_target(const FeasibilityProblem& problem, const DualSolveOptions& opts = {});

/// D_C(x) for an affine family.
double intersection_distance(const FeasibilityProblem& problem, const Vector& x, const DualSolveOptions& opts = {});

struct RateEstimate {
    double global_rate = 0.0; // max_k D_C(x_{k+1}) / D_C(x_k)
    double tail_rate = 0.0;   // geometric mean of the last quartile of ratios
    std::size_t ratios = 0;
};

/// Ratios are taken while D_C(x_k) > relative_floor * D_C(x_0) and stop at
/// the first zero. Throws InvalidArgument with fewer than 10 usable entries.
RateEstimate estimate_rate(std::span<const double> dc, double relative_floor = 0.0);
RateEstimate estimate_rate(const IterationTrace& trace, double relative_floor = 0.0);

} // namespace bregproj
