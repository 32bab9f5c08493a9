#include "bregproj/io.hpp"

#include <fstream>
#include <sstream>

#include <Eigen/Sparse>
#include <unsupported/Eigen/SparseExtra>

namespace bregproj::io {
namespace {

const json& require(const json& j, const char* key, const char* where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ParseError(std::string(where) + ": missing required field '" + key + "'");
    }
    return j.at(key);
}

double number(const json& j, const char* what) {
    if (!j.is_number()) throw ParseError(std::string(what) + " must be a number");
    return j.get<double>();
}

std::vector<std::size_t> extents_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("shape must be a nonempty array");
    std::vector<std::size_t> out;
    for (const auto& e : j) {
        if (!e.is_number_integer() || e.get<long long>() < 1) throw ParseError("shape entries must be positive integers");
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

Vector vector_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw ParseError(std::string(what) + " must be an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = number(j[k], what);
    return v;
}

Matrix matrix_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw ParseError(std::string(what) + " must be a nonempty array of rows");
    }
    const std::size_t cols = j[0].size();
    Matrix A(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw ParseError(std::string(what) + " rows must have equal length");
        for (std::size_t c = 0; c < cols; ++c) {
            A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], what);
        }
    }
    return A;
}

json to_json(const Vector& v) {
    json j = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v[k]);
    return j;
}

json to_json(const Matrix& A) {
    json j = json::array();
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(A(r, c));
        j.push_back(std::move(row));
    }
    return j;
}

json to_json(const LegendreFunction& f) {
    json params = json::object();
    switch (f.kind()) {
    case LegendreKind::power: params["beta"] = f.param(); break;
    case LegendreKind::tsallis: params["q"] = f.param(); break;
    case LegendreKind::p_norm: params["p"] = f.param(); break;
    case LegendreKind::quadratic: params["B"] = to_json(f.quadratic_form()); break;
    default: break;
    }
    return {{"kind", std::string(to_string(f.kind()))}, {"params", params}, {"dim", f.dim()}};
}

LegendreFunction legendre_from_json(const json& j, std::optional<Eigen::Index> default_dim) {
    const auto kind = legendre_kind_from_string(require(j, "kind", "legendre").get<std::string>());
    const json params = j.value("params", json::object());
    Eigen::Index dim = 0;
    if (j.contains("dim")) {
        if (!j["dim"].is_number_integer() || j["dim"].get<long long>() < 1) throw ParseError("legendre.dim must be a positive integer");
        dim = j["dim"].get<Eigen::Index>();
    } else if (default_dim) {
        dim = *default_dim;
    }
    auto need_dim = [&] {
        if (dim < 1) throw ParseError("legendre.dim is required");
        return dim;
    };
    switch (kind) {
    case LegendreKind::boltzmann_shannon: return LegendreFunction::boltzmann_shannon(need_dim());
    case LegendreKind::burg: return LegendreFunction::burg(need_dim());
    case LegendreKind::fermi_dirac: return LegendreFunction::fermi_dirac(need_dim());
    case LegendreKind::hellinger: return LegendreFunction::hellinger(need_dim());
    case LegendreKind::power: return LegendreFunction::power(need_dim(), number(require(params, "beta", "legendre.params"), "beta"));
    case LegendreKind::tsallis: return LegendreFunction::tsallis(need_dim(), number(require(params, "q", "legendre.params"), "q"));
    case LegendreKind::p_norm: return LegendreFunction::p_norm(need_dim(), number(require(params, "p", "legendre.params"), "p"));
    case LegendreKind::quadratic: {
        if (params.contains("B")) {
            const Matrix B = matrix_from_json(params["B"], "legendre.params.B");
            if (dim > 0 && B.rows() != dim) throw ParseError("legendre.params.B does not match legendre.dim");
            return LegendreFunction::quadratic(B);
        }
        return LegendreFunction::identity_quadratic(need_dim());
    }
    }
    throw ParseError("unsupported Legendre kind");
}

json to_json(const ConstraintSet& s) {
    json j = std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, Hyperplane>) return {{"type", "hyperplane"}, {"a", to_json(r.a)}, {"b", r.b}};
            else if constexpr (std::is_same_v<T, Halfspace>) return {{"type", "halfspace"}, {"a", to_json(r.a)}, {"b", r.b}};
            else if constexpr (std::is_same_v<T, GeneralAffine>) return {{"type", "general"}, {"A", to_json(r.A)}, {"b", to_json(r.b)}};
            else return {{"type", "ot_marginal"}, {"shape", r.shape.extents()}, {"axis", r.axis}, {"target", to_json(r.target)}};
        },
        s.representation());
    j["label"] = s.label();
    return j;
}

ConstraintSet constraint_set_from_json(const json& j) {
    const std::string type = require(j, "type", "set").get<std::string>();
    const int label = j.value("label", 0);
    if (type == "hyperplane") {
        return {Hyperplane{vector_from_json(require(j, "a", "hyperplane"), "a"), number(require(j, "b", "hyperplane"), "b")}, label};
    }
    if (type == "halfspace") {
        return {Halfspace{vector_from_json(require(j, "a", "halfspace"), "a"), number(require(j, "b", "halfspace"), "b")}, label};
    }
    if (type == "general") {
        return {GeneralAffine{matrix_from_json(require(j, "A", "general"), "A"), vector_from_json(require(j, "b", "general"), "b")},
                label};
    }
    if (type == "ot_marginal") {
        const auto axis = require(j, "axis", "ot_marginal").get<std::size_t>();
        return {OtMarginal{TensorShape(extents_from_json(require(j, "shape", "ot_marginal"))), axis,
                           vector_from_json(require(j, "target", "ot_marginal"), "target")},
                label};
    }
    throw ParseError("unknown set type '" + type + "'");
}

json to_json(const ControlScheme& c) {
    json j{{"control", std::string(to_string(c.kind))}, {"seed", c.seed}};
    j["mu"] = c.mu;
    return j;
}

ControlScheme control_from_json(const json& j, std::size_t m) {
    ControlScheme c;
    c.kind = control_kind_from_string(j.value("control", std::string("cyclic")));
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) throw ParseError("control.seed must be an integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("mu") && !j["mu"].empty()) {
        const Vector mu = vector_from_json(j["mu"], "control.mu");
        c.mu.assign(mu.data(), mu.data() + mu.size());
    } else if (c.kind == ControlKind::random || c.kind == ControlKind::adaptive) {
        c.mu.assign(m, 1.0 / static_cast<double>(m));
    }
    c.validate(m);
    return c;
}

json to_json(const SolveOptions& o) {
    return {{"max_iterations", o.max_iterations},
            {"stop_residual", o.stop_residual},
            {"trace_every", o.trace_every},
            {"compute_DC_trace", o.compute_dc_trace}};
}

SolveOptions options_from_json(const json& j) {
    SolveOptions o;
    if (j.is_null()) return o;
    o.max_iterations = j.value("max_iterations", o.max_iterations);
    o.stop_residual = j.value("stop_residual", o.stop_residual);
    o.trace_every = j.value("trace_every", o.trace_every);
    o.compute_dc_trace = j.value("compute_DC_trace", o.compute_dc_trace);
    if (j.contains("dual")) {
        const json& d = j["dual"];
        o.dual.residual_tolerance = d.value("residual_tolerance", o.dual.residual_tolerance);
        o.dual.max_newton_iterations = d.value("max_newton_iterations", o.dual.max_newton_iterations);
        o.dual.line_search_shrink = d.value("line_search_shrink", o.dual.line_search_shrink);
    }
    o.validate();
    return o;
}

json to_json(const OtProblem& p) {
    json marg = json::array();
    for (const auto& r : p.marginals) marg.push_back(to_json(r));
    return {{"shape", p.shape.extents()}, {"cost", to_json(p.cost)}, {"eta", p.eta}, {"marginals", marg}};
}

OtProblem ot_problem_from_json(const json& j) {
    OtProblem p;
    p.shape = TensorShape(extents_from_json(require(j, "shape", "ot")));
    p.cost = vector_from_json(require(j, "cost", "ot"), "ot.cost");
    p.eta = number(require(j, "eta", "ot"), "ot.eta");
    const json& marg = require(j, "marginals", "ot");
    if (!marg.is_array()) throw ParseError("ot.marginals must be an array");
    for (const auto& r : marg) p.marginals.push_back(vector_from_json(r, "ot.marginals"));
    p.validate();
    return p;
}

json to_json(const TraceRecord& r) {
    return {{"k", r.k}, {"xi", r.xi}, {"d_sel", r.d_sel}, {"res", r.residual}, {"DC", optional_number(r.dc)}, {"t_ms", r.t_ms}};
}

TraceRecord trace_record_from_json(const json& j) {
    TraceRecord r;
    r.k = require(j, "k", "trace record").get<int>();
    r.xi = require(j, "xi", "trace record").get<int>();
    r.d_sel = number(require(j, "d_sel", "trace record"), "d_sel");
    r.residual = number(require(j, "res", "trace record"), "res");
    const json& dc = require(j, "DC", "trace record");
    if (!dc.is_null()) r.dc = number(dc, "DC");
    r.t_ms = number(require(j, "t_ms", "trace record"), "t_ms");
    return r;
}

json summary_json(const IterationTrace& trace) {
    json j{{"status", std::string(to_string(trace.status))},
           {"iterations", trace.iterations},
           {"final_residual", trace.final_residual},
           {"final_DC", optional_number(trace.final_dc)},
           {"x_final", to_json(trace.x_final)}};
    json rates = nullptr;
    bool full_dc = !trace.records.empty() && trace.final_dc.has_value();
    for (const auto& r : trace.records) full_dc = full_dc && r.dc.has_value();
    if (full_dc && trace.records.size() + 1 == static_cast<std::size_t>(trace.iterations) + 1) {
        try {
            const auto est = estimate_rate(trace);
            rates = {{"global_rate", est.global_rate}, {"tail_rate", est.tail_rate}, {"ratios", est.ratios}};
        } catch (const InvalidArgument&) {
            // fewer than 10 positive D_C values
        }
    }
    j["rates"] = rates;
    return j;
}

json to_json(const RateReport& r) {
    json j{{"gamma_greedy_lower", r.gamma_greedy_lower},
           {"gamma_greedy", r.gamma_greedy},
           {"gamma_random", r.gamma_random},
           {"local_greedy_rate", r.local_greedy_rate},
           {"local_random_rate", r.local_random_rate},
           {"H2_holds", r.h2_holds},
           {"H2_sup_norm", r.h2_sup_norm},
           {"exactness", r.exactness ? json(*r.exactness) : json(nullptr)},
           {"notes", r.notes}};
    if (r.kaczmarz) {
        j["kaczmarz"] = {{"sigma_greedy", r.kaczmarz->sigma_greedy}, {"sigma_random", r.kaczmarz->sigma_random}};
    } else {
        j["kaczmarz"] = nullptr;
    }
    return j;
}

json to_json(const BatchResult& b) {
    return {{"trials", b.trials},
            {"steps", b.steps},
            {"converged", b.converged},
            {"mean_ratio", b.mean_ratio},
            {"mean_first_ratio", b.mean_first_ratio},
            {"mean_DC", b.mean_dc},
            {"mean_step_ratio", b.mean_step_ratio},
            {"active", b.active}};
}

Matrix read_matrix_market(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ParseError("MatrixMarket file not found: " + path.string());
    Eigen::SparseMatrix<double> S;
    if (!Eigen::loadMarket(S, path.string())) throw ParseError("could not read MatrixMarket file " + path.string());
    return Matrix(S);
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str(), path.string());
}

LoadedProblem load_problem(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ParseError("problem document must be a JSON object");
    const bool has_system = doc.contains("system");
    const bool has_ot = doc.contains("ot");
    if (has_system == has_ot) throw ParseError("problem document needs exactly one of 'system' or 'ot'");

    std::optional<OtProblem> ot;
    std::optional<SketchFamily> sketch;
    std::vector<ConstraintSet> sets;
    Eigen::Index n = 0;

    if (has_ot) {
        ot = ot_problem_from_json(doc["ot"]);
        const bool rows = doc.value("ot_row_sets", false);
        sets = rows ? greenkhorn_sets(*ot) : marginal_sets(*ot);
        n = static_cast<Eigen::Index>(ot->shape.size());
    } else {
        const json& sys = doc["system"];
        if (sys.contains("sets")) {
            for (const auto& s : sys["sets"]) sets.push_back(constraint_set_from_json(s));
            if (sets.empty()) throw ParseError("system.sets is empty");
        } else {
            Matrix A;
            if (sys.contains("A")) {
                A = matrix_from_json(sys["A"], "system.A");
            } else if (sys.contains("mm_path")) {
                std::filesystem::path p = sys["mm_path"].get<std::string>();
                if (p.is_relative()) p = base_dir / p;
                A = read_matrix_market(p);
            } else {
                throw ParseError("system needs 'A', 'mm_path' or 'sets'");
            }
            const Vector b = vector_from_json(require(sys, "b", "system"), "system.b");
            if (b.size() != A.rows()) throw ParseError("system.b length does not match the rows of A");
            const json sk = doc.value("sketch", json(nullptr));
            std::string spec = "rows";
            std::uint64_t seed = 0;
            if (sk.is_string()) {
                spec = sk.get<std::string>();
            } else if (sk.is_object()) {
                const std::string kind = sk.value("kind", std::string("rows"));
                seed = sk.value("seed", std::uint64_t{0});
                if (kind == "rows") spec = "rows";
                else if (kind == "blocks") spec = "blocks:" + std::to_string(sk.value("tau", 1));
                else if (kind == "gaussian") {
                    spec = "gaussian:" + std::to_string(sk.value("count", 1)) + "," + std::to_string(sk.value("tau", 1));
                } else {
                    throw ParseError("unknown sketch kind '" + kind + "'");
                }
            }
            sketch = SketchFamily::from_spec(spec, A, b, seed);
            sets = sketch->build_sets();
        }
        n = sets.front().ambient_dim();
    }

    const LegendreFunction f = doc.contains("legendre")
                                   ? legendre_from_json(doc["legendre"], n)
                                   : (has_ot ? LegendreFunction::boltzmann_shannon(n) : LegendreFunction::identity_quadratic(n));
    if (f.dim() != n) throw ParseError("legendre.dim does not match the problem dimension");
    if (has_ot && f.kind() != LegendreKind::boltzmann_shannon) {
        throw ParseError("OT problems use the Boltzmann-Shannon entropy");
    }

    Vector x0;
    if (doc.contains("x0")) {
        x0 = vector_from_json(doc["x0"], "x0");
    } else if (has_ot) {
        x0 = ot->kernel().values();
    } else if (auto z = gradient_zero_point(f)) {
        x0 = *z;
    } else {
        throw ParseError("x0 is required: this Legendre function has no point with zero gradient");
    }

    LoadedProblem out{FeasibilityProblem::make(f, std::move(sets), std::move(x0)), ControlScheme::cyclic(),
                      options_from_json(doc.value("options", json(nullptr))), std::move(ot), std::move(sketch),
                      std::nullopt};
    out.control = control_from_json(doc.value("control", json::object()), out.problem.sets.size());
    if (doc.contains("x_star")) out.x_star = vector_from_json(doc["x_star"], "x_star");
    return out;
}

LoadedProblem load_problem_file(const std::filesystem::path& path) {
    return load_problem(read_json_file(path), path.parent_path());
}

} // namespace bregproj::io
