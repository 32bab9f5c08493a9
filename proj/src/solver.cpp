#include "bregproj/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace bregproj {

std::string_view to_string(SolveStatus status) {
    return status == SolveStatus::converged ? "converged" : "budget_exhausted";
}

SolveError::SolveError(int step, const std::string& what)
    : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

FeasibilityProblem FeasibilityProblem::make(LegendreFunction f, std::vector<ConstraintSet> sets, Vector x0) {
    FeasibilityProblem p{std::move(f), std::move(sets), std::nullopt, std::move(x0)};
    if (p.all_affine() && !p.sets.empty()) p.intersection = stack_sets(p.sets);
    p.validate();
    return p;
}

bool FeasibilityProblem::all_affine() const {
    return std::all_of(sets.begin(), sets.end(), [](const ConstraintSet& s) { return s.is_affine(); });
}

void FeasibilityProblem::validate() const {
    if (sets.empty()) throw InvalidArgument("feasibility problem needs at least one set");
    for (const auto& s : sets) {
        if (s.ambient_dim() != f.dim()) throw InvalidArgument("set dimension does not match the Legendre function");
    }
    if (x0.size() != f.dim()) throw InvalidArgument("x0 has the wrong dimension");
    if (!f.in_interior(x0)) throw DomainError("x0 must lie in int(dom phi)");
    if (intersection && intersection->A.cols() != f.dim()) {
        throw InvalidArgument("intersection operator has the wrong number of columns");
    }
}

void SolveOptions::validate() const {
    if (max_iterations < 0) throw InvalidArgument("max_iterations must be nonnegative");
    if (!(stop_residual > 0.0)) throw InvalidArgument("stop_residual must be positive");
    if (trace_every < 1) throw InvalidArgument("trace_every must be positive");
    dual.validate();
}

std::vector<double> IterationTrace::dc_sequence() const {
    std::vector<double> out;
    out.reserve(records.size() + 1);
    for (const auto& r : records) {
        if (!r.dc) throw InvalidArgument("trace has no D_C values; enable compute_dc_trace");
        out.push_back(*r.dc);
    }
    if (final_dc) out.push_back(*final_dc);
    return out;
}

Vector fixed_target(const FeasibilityProblem& problem, const DualSolveOptions& opts) {
    if (!problem.intersection) throw InvalidArgument("fixed_target needs an affine family with a stacked intersection");
    return project_affine(problem.f, problem.intersection->A, problem.intersection->b, problem.x0, opts).x;
}

double intersection_distance(const FeasibilityProblem& problem, const Vector& x, const DualSolveOptions& opts) {
    if (!problem.intersection) throw InvalidArgument("D_C needs an affine family with a stacked intersection");
    const Vector p = project_affine(problem.f, problem.intersection->A, problem.intersection->b, x, opts).x;
    return divergence(problem.f, p, x);
}

IterationTrace solve(const FeasibilityProblem& problem, const ControlScheme& scheme, const SolveOptions& opts,
                     std::uint64_t stream) {
    problem.validate();
    opts.validate();
    if (opts.compute_dc_trace && !problem.intersection) {
        throw InvalidArgument("compute_dc_trace requires an affine family with a stacked intersection");
    }
    const std::size_t m = problem.sets.size();
    Controller controller(scheme, m, stream);

    DualSolveOptions inner = opts.dual;
    inner.residual_tolerance = std::min(inner.residual_tolerance, 0.1 * opts.stop_residual);

    const auto start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };
    auto residual_of = [&](const Vector& x) {
        double r = 0.0;
        for (const auto& s : problem.sets) r = std::max(r, s.residual(x));
        return r;
    };

    IterationTrace trace;
    Vector x = problem.x0;
    if (opts.keep_iterates) trace.iterates.push_back(x);

    std::vector<double> distances(m, 0.0);
    std::vector<Vector> projections(m);
    int k = 0;
    for (;; ++k) {
        const double res = residual_of(x);
        std::optional<double> dc;
        try {
            if (opts.compute_dc_trace) dc = intersection_distance(problem, x, inner);
        } catch (const Error& e) {
            throw SolveError(k, std::string("D_C evaluation failed: ") + e.what());
        }
        if (res <= opts.stop_residual) {
            trace.status = SolveStatus::converged;
            trace.final_residual = res;
            trace.final_dc = dc;
            break;
        }
        if (k >= opts.max_iterations) {
            trace.status = SolveStatus::budget_exhausted;
            trace.final_residual = res;
            trace.final_dc = dc;
            break;
        }

        std::size_t xi = 0;
        Vector next;
        double d_sel = 0.0;
        try {
            if (scheme.needs_distances()) {
                for (std::size_t i = 0; i < m; ++i) {
                    auto sd = distance_to_set(problem.f, problem.sets[i], x, inner);
                    distances[i] = sd.distance;
                    projections[i] = std::move(sd.projection);
                }
                xi = controller.next_index(std::span<const double>(distances));
                next = std::move(projections[xi]);
                d_sel = distances[xi];
            } else {
                xi = controller.next_index();
                next = project(problem.f, problem.sets[xi], x, inner);
                d_sel = divergence(problem.f, next, x);
            }
        } catch (const SolveError&) {
            throw;
        } catch (const Error& e) {
            throw SolveError(k, e.what());
        }

        if (k % opts.trace_every == 0) {
            trace.records.push_back({k, static_cast<int>(xi), d_sel, res, dc, elapsed_ms()});
        }
        x = std::move(next);
        if (opts.keep_iterates) trace.iterates.push_back(x);
    }
    trace.iterations = k;
    trace.x_final = std::move(x);
    return trace;
}

RateEstimate estimate_rate(std::span<const double> dc, double relative_floor) {
    std::size_t usable = 0;
    const double floor = dc.empty() ? 0.0 : relative_floor * dc[0];
    while (usable < dc.size() && dc[usable] > 0.0 && dc[usable] > floor) ++usable;
    if (usable < 10) {
        throw InvalidArgument("estimate_rate needs at least 10 positive D_C entries, got " + std::to_string(usable));
    }
    std::vector<double> ratios;
    for (std::size_t k = 0; k + 1 < usable; ++k) ratios.push_back(dc[k + 1] / dc[k]);
    RateEstimate est;
    est.ratios = ratios.size();
    est.global_rate = *std::max_element(ratios.begin(), ratios.end());
    const std::size_t tail = std::max<std::size_t>(1, ratios.size() / 4);
    double log_sum = 0.0;
    for (std::size_t k = ratios.size() - tail; k < ratios.size(); ++k) log_sum += std::log(ratios[k]);
    est.tail_rate = std::exp(log_sum / static_cast<double>(tail));
    return est;
}

RateEstimate estimate_rate(const IterationTrace& trace, double relative_floor) {
    const auto dc = trace.dc_sequence();
    return estimate_rate(std::span<const double>(dc), relative_floor);
}

} // namespace bregproj
