#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bregproj/batch.hpp"
#include "bregproj/io.hpp"
#include "bregproj/rates.hpp"
#include "bregproj/solver.hpp"

namespace fs = std::filesystem;
using namespace bregproj;
using io::json;

namespace {

enum Exit { ok = 0, failure = 1, budget = 2 };

struct Common {
    std::string problem;
    std::optional<std::string> control;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iter;
    std::optional<double> tol;
    std::optional<int> trace_every;
    bool dc_trace = false;
    std::string out;
    bool csv = false;
    std::optional<std::string> sketch;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("problem", c.problem, "Problem file (JSON)")->required();
    cmd->add_option("--control", c.control, "cyclic | greedy | random | adaptive")
        ->check(CLI::IsMember({"cyclic", "greedy", "random", "adaptive"}));
    cmd->add_option("--seed", c.seed, "Seed of the random controls");
    cmd->add_option("--max-iter", c.max_iter, "Iteration budget")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tol", c.tol, "Stop when the constraint residual is at most this")->check(CLI::PositiveNumber);
    cmd->add_option("--trace-every", c.trace_every, "Record every n-th step")->check(CLI::PositiveNumber);
    cmd->add_flag("--dc-trace", c.dc_trace, "Record D_C(x_k) at every traced step");
    cmd->add_option("--out", c.out, "Output directory");
    cmd->add_flag("--csv", c.csv, "Also write per-step D_C as CSV");
    cmd->add_option("--sketch", c.sketch, "rows | blocks:<tau> | gaussian:<s>,<tau>");
}

json load_document(const Common& c) {
    json doc = io::read_json_file(c.problem);
    if (!doc.is_object()) throw io::ParseError(c.problem + ": problem document must be a JSON object");
    if (!doc.contains("control")) doc["control"] = json::object();
    if (!doc.contains("options") || doc["options"].is_null()) doc["options"] = json::object();
    json& ctl = doc["control"];
    if (c.control) ctl["control"] = *c.control;
    if (c.seed) ctl["seed"] = *c.seed;
    json& opt = doc["options"];
    if (c.max_iter) opt["max_iterations"] = *c.max_iter;
    if (c.tol) opt["stop_residual"] = *c.tol;
    if (c.trace_every) opt["trace_every"] = *c.trace_every;
    if (c.dc_trace || c.csv) opt["compute_DC_trace"] = true;
    if (c.sketch) doc["sketch"] = *c.sketch;
    return doc;
}

fs::path output_dir(const Common& c) {
    fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_trace(const fs::path& dir, const IterationTrace& trace, bool csv) {
    std::string lines;
    for (const auto& r : trace.records) lines += io::to_json(r).dump() + "\n";
    write_text(dir / "trace.jsonl", lines);
    write_text(dir / "summary.json", io::summary_json(trace).dump(2) + "\n");
    if (csv) {
        std::string rows = "k,DC\n";
        char buf[64];
        for (const auto& r : trace.records) {
            if (!r.dc) continue;
            std::snprintf(buf, sizeof buf, "%d,%.17g\n", r.k, *r.dc);
            rows += buf;
        }
        if (trace.final_dc) {
            std::snprintf(buf, sizeof buf, "%d,%.17g\n", trace.iterations, *trace.final_dc);
            rows += buf;
        }
        write_text(dir / "dc.csv", rows);
    }
}

int report_solve(const IterationTrace& trace, const fs::path& dir) {
    std::cout << "status: " << to_string(trace.status) << "\n"
              << "iterations: " << trace.iterations << "\n"
              << "final residual: " << trace.final_residual << "\n";
    if (trace.final_dc) std::cout << "final D_C: " << *trace.final_dc << "\n";
    std::cout << "wrote " << (dir / "trace.jsonl").string() << " and " << (dir / "summary.json").string() << "\n";
    return trace.status == SolveStatus::converged ? ok : budget;
}

int cmd_solve(const Common& c) {
    const auto loaded = io::load_problem(load_document(c), fs::path(c.problem).parent_path());
    const auto trace = solve(loaded.problem, loaded.control, loaded.options);
    const fs::path dir = output_dir(c);
    write_trace(dir, trace, c.csv);
    return report_solve(trace, dir);
}

int cmd_ot(const Common& c, const std::string& algo) {
    json doc = load_document(c);
    if (!doc.contains("ot")) throw io::ParseError(c.problem + ": the ot subcommand needs an 'ot' section");
    doc["ot_row_sets"] = algo == "greenkhorn";
    doc["control"]["control"] = (algo == "sinkhorn" || algo == "greenkhorn") ? std::string("greedy") : algo;
    if (algo == "random" || algo == "adaptive") doc["control"].erase("mu");
    const auto loaded = io::load_problem(doc, fs::path(c.problem).parent_path());
    const auto trace = solve(loaded.problem, loaded.control, loaded.options);
    const fs::path dir = output_dir(c);
    write_trace(dir, trace, c.csv);
    json plan{{"shape", loaded.ot->shape.extents()}, {"plan", io::to_json(trace.x_final)}};
    write_text(dir / "plan.json", plan.dump(2) + "\n");
    return report_solve(trace, dir);
}

std::vector<double> weights_of(const io::LoadedProblem& loaded) {
    const std::size_t m = loaded.problem.sets.size();
    if (!loaded.control.mu.empty()) return loaded.control.mu;
    return std::vector<double>(m, 1.0 / static_cast<double>(m));
}

int cmd_rates(const Common& c, const std::optional<std::string>& trace_path) {
    const auto loaded = io::load_problem(load_document(c), fs::path(c.problem).parent_path());
    const Vector x_star = loaded.x_star ? *loaded.x_star : fixed_target(loaded.problem, loaded.options.dual);
    const auto mu = weights_of(loaded);
    RateReport report = rate_report(loaded.problem.f, loaded.problem.sets, mu, x_star);
    if (loaded.sketch) {
        report.exactness = check_exactness(loaded.sketch->A(),
                                           averaged_sketch_projector(loaded.sketch->A(), loaded.sketch->sketches(), mu));
    }
    json out = io::to_json(report);

    std::optional<RateEstimate> observed;
    if (trace_path) {
        std::ifstream in(*trace_path);
        if (!in) throw io::ParseError("cannot open " + *trace_path);
        std::vector<double> dc;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto rec = io::trace_record_from_json(io::parse_json(line, *trace_path + ":" + std::to_string(lineno)));
            if (!rec.dc) throw io::ParseError(*trace_path + ":" + std::to_string(lineno) + ": record has no DC value");
            dc.push_back(*rec.dc);
        }
        observed = estimate_rate(std::span<const double>(dc), 1e-12);
        out["observed"] = {{"global_rate", observed->global_rate}, {"tail_rate", observed->tail_rate},
                           {"ratios", observed->ratios}};
    }

    const fs::path dir = output_dir(c);
    write_text(dir / "rates.json", out.dump(2) + "\n");

    std::printf("%-28s %s\n", "quantity", "value");
    std::printf("%-28s %.6g\n", "gamma_random", report.gamma_random);
    std::printf("%-28s %.6g\n", "gamma_greedy (estimate)", report.gamma_greedy);
    std::printf("%-28s %.6g\n", "gamma_greedy (lower)", report.gamma_greedy_lower);
    std::printf("%-28s %.6g\n", "predicted random rate", report.local_random_rate);
    std::printf("%-28s %.6g\n", "predicted greedy rate", report.local_greedy_rate);
    if (report.kaczmarz) {
        std::printf("%-28s %.6g\n", "sigma_random (row action)", report.kaczmarz->sigma_random);
        std::printf("%-28s %.6g\n", "sigma_greedy (row action)", report.kaczmarz->sigma_greedy);
    }
    if (report.exactness) std::printf("%-28s %s\n", "exactness", *report.exactness ? "holds" : "fails");
    if (observed) {
        std::printf("%-28s %.6g\n", "observed tail rate", observed->tail_rate);
        std::printf("%-28s %.6g\n", "observed global rate", observed->global_rate);
    }
    for (const auto& note : report.notes) std::printf("note: %s\n", note.c_str());
    return ok;
}

int cmd_bench(const Common& c, std::size_t trials, int steps) {
    const auto loaded = io::load_problem(load_document(c), fs::path(c.problem).parent_path());
    const auto mu = weights_of(loaded);
    const std::uint64_t seed = loaded.control.seed;
    SolveOptions base = loaded.options;
    base.compute_dc_trace = true;
    base.trace_every = 1;
    const unsigned threads = default_thread_count();
    const auto random = run_batch(loaded.problem, ControlScheme::random(mu, seed), trials, steps, base, threads);
    const auto adaptive = run_batch(loaded.problem, ControlScheme::adaptive(mu, seed), trials, steps, base, threads);
    json comparison{{"mean_ratio_random", random.mean_ratio},
                    {"mean_ratio_adaptive", adaptive.mean_ratio},
                    {"first_ratio_random", random.mean_first_ratio},
                    {"first_ratio_adaptive", adaptive.mean_first_ratio}};
    json out = json::object();
    out["seed"] = seed;
    out["trials"] = trials;
    out["steps"] = steps;
    out["random"] = io::to_json(random);
    out["adaptive"] = io::to_json(adaptive);
    out["comparison"] = comparison;
    const fs::path dir = output_dir(c);
    const std::string text = out.dump(2) + "\n";
    write_text(dir / "bench.json", text);
    if (c.csv) {
        std::string rows = "k,mean_DC_random,mean_DC_adaptive\n";
        char buf[96];
        for (std::size_t k = 0; k < random.mean_dc.size() && k < adaptive.mean_dc.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", k, random.mean_dc[k], adaptive.mean_dc[k]);
            rows += buf;
        }
        write_text(dir / "bench.csv", rows);
    }
    std::printf("%-10s %-14s %-14s\n", "control", "mean ratio", "first ratio");
    std::printf("%-10s %-14.6g %-14.6g\n", "random", random.mean_ratio, random.mean_first_ratio);
    std::printf("%-10s %-14.6g %-14.6g\n", "adaptive", adaptive.mean_ratio, adaptive.mean_first_ratio);
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bregman projection methods for affine feasibility"};
    app.require_subcommand(1);

    Common solve_args, rates_args, bench_args, ot_args;
    auto* solve_cmd = app.add_subcommand("solve", "Run the projection method and write a trace");
    add_common(solve_cmd, solve_args);

    auto* rates_cmd = app.add_subcommand("rates", "Local rate constants at the solution");
    add_common(rates_cmd, rates_args);
    std::optional<std::string> trace_path;
    rates_cmd->add_option("--trace", trace_path, "trace.jsonl with DC values to compare against");

    auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo comparison of random and adaptive controls");
    add_common(bench_cmd, bench_args);
    std::size_t trials = 1000;
    int steps = 20;
    bench_cmd->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--steps", steps, "Steps per trial")->check(CLI::PositiveNumber);

    auto* ot_cmd = app.add_subcommand("ot", "Entropic multimarginal transport");
    add_common(ot_cmd, ot_args);
    std::string algo = "sinkhorn";
    ot_cmd->add_option("--algo", algo, "sinkhorn | greenkhorn | random | adaptive")
        ->check(CLI::IsMember({"sinkhorn", "greenkhorn", "random", "adaptive"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : failure;
    }

    try {
        if (*solve_cmd) return cmd_solve(solve_args);
        if (*rates_cmd) return cmd_rates(rates_args, trace_path);
        if (*bench_cmd) return cmd_bench(bench_args, trials, steps);
        if (*ot_cmd) return cmd_ot(ot_args, algo);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return failure;
}
