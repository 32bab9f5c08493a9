#include "bregproj/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace bregproj {

unsigned default_thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BREGPROJ_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

BatchResult run_batch(const FeasibilityProblem& problem, const ControlScheme& scheme, std::size_t trials, int steps,
                      const SolveOptions& base, unsigned threads) {
    if (trials == 0) throw InvalidArgument("run_batch needs at least one trial");
    if (steps < 1) throw InvalidArgument("run_batch needs at least one step");
    if (!problem.intersection) throw InvalidArgument("run_batch needs an affine family (D_C tracing)");

    SolveOptions opts = base;
    opts.max_iterations = steps;
    opts.compute_dc_trace = true;
    opts.trace_every = 1;
    opts.keep_iterates = false;

    std::vector<std::vector<double>> dc(trials);
    std::vector<char> converged(trials, 0);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
            try {
                const auto trace = solve(problem, scheme, opts, t);
                dc[t] = trace.dc_sequence();
                converged[t] = trace.status == SolveStatus::converged;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(threads == 0 ? default_thread_count() : threads,
                                                               static_cast<unsigned>(trials)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Reduce in trial order so the aggregate is independent of scheduling.
    BatchResult out;
    out.trials = trials;
    out.steps = steps;
    const auto len = static_cast<std::size_t>(steps) + 1;
    out.mean_dc.assign(len, 0.0);
    out.mean_step_ratio.assign(len - 1, 0.0);
    out.active.assign(len - 1, 0);
    double pooled = 0.0;
    std::size_t pooled_count = 0;
    double first = 0.0;
    std::size_t first_count = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto& seq = dc[t];
        out.converged += converged[t] ? 1 : 0;
        for (std::size_t k = 0; k < len; ++k) out.mean_dc[k] += seq[std::min(k, seq.size() - 1)];
        for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
            if (!(seq[k] > 0.0)) break;
            const double r = seq[k + 1] / seq[k];
            out.mean_step_ratio[k] += r;
            out.active[k] += 1;
            pooled += r;
            ++pooled_count;
            if (k == 0) {
                first += r;
                ++first_count;
            }
        }
    }
    for (auto& v : out.mean_dc) v /= static_cast<double>(trials);
    for (std::size_t k = 0; k + 1 < len; ++k) {
        if (out.active[k] > 0) out.mean_step_ratio[k] /= static_cast<double>(out.active[k]);
    }
    out.mean_ratio = pooled_count > 0 ? pooled / static_cast<double>(pooled_count) : 0.0;
    out.mean_first_ratio = first_count > 0 ? first / static_cast<double>(first_count) : 0.0;
    return out;
}

} // namespace bregproj
