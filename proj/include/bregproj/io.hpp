#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "bregproj/batch.hpp"
#include "bregproj/controls.hpp"
#include "bregproj/geometry.hpp"
#include "bregproj/legendre.hpp"
#include "bregproj/ot.hpp"
#include "bregproj/rates.hpp"
#include "bregproj/sketch.hpp"
#include "bregproj/solver.hpp"

namespace bregproj::io {

using nlohmann::json;

/// Malformed input document; carries a line number when one is known.
class ParseError : public Error {
public:
    using Error::Error;
};

Vector vector_from_json(const json& j, const char* what);
Matrix matrix_from_json(const json& j, const char* what);
json to_json(const Vector& v);
json to_json(const Matrix& A);

// {"kind": string, "params": {...}, "dim": n}
json to_json(const LegendreFunction& f);
LegendreFunction legendre_from_json(const json& j, std::optional<Eigen::Index> default_dim = std::nullopt);

// {"type": "hyperplane" | "general" | "ot_marginal" | "halfspace", ...}
json to_json(const ConstraintSet& s);
ConstraintSet constraint_set_from_json(const json& j);

// {"control": "cyclic" | "greedy" | "random" | "adaptive", "mu": [...], "seed": u64}
json to_json(const ControlScheme& c);
ControlScheme control_from_json(const json& j, std::size_t m);

json to_json(const SolveOptions& o);
SolveOptions options_from_json(const json& j);

// {"shape": [...], "cost": [...], "eta": x, "marginals": [[...], ...]}
json to_json(const OtProblem& p);
OtProblem ot_problem_from_json(const json& j);

/// {"k", "xi", "d_sel", "res", "DC", "t_ms"}
json to_json(const TraceRecord& r);
TraceRecord trace_record_from_json(const json& j);

json summary_json(const IterationTrace& trace);
json to_json(const RateReport& r);
json to_json(const BatchResult& b);

/// Dense matrix from a MatrixMarket coordinate file.
Matrix read_matrix_market(const std::filesystem::path& path);

/// Everything a problem file describes.
struct LoadedProblem {
    FeasibilityProblem problem;
    ControlScheme control;
    SolveOptions options;
    std::optional<OtProblem> ot;
    std::optional<SketchFamily> sketch;
    std::optional<Vector> x_star;
};

/// Problem document: {"legendre", "system" | "ot", "sketch"?, "x0"?,
/// "control"?, "options"?, "x_star"?}. Relative "mm_path" entries resolve
/// against base_dir.
LoadedProblem load_problem(const json& doc, const std::filesystem::path& base_dir = {});
LoadedProblem load_problem_file(const std::filesystem::path& path);

/// Parses text, reporting the line and column of syntax errors.
json parse_json(const std::string& text, const std::string& source);
json read_json_file(const std::filesystem::path& path);

} // namespace bregproj::io
