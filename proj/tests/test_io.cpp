#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bregproj/io.hpp"
#include "test_support.hpp"

using namespace bregproj;
using bregproj::io::json;
using bregproj::testing::Sampler;

namespace {

std::filesystem::path data_dir() { return BREGPROJ_DATA_DIR; }

std::string parse_message(const std::string& text) {
    try {
        io::parse_json(text, "doc.json");
    } catch (const io::ParseError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("Legendre functions round-trip") {
    Sampler s(1);
    for (const auto& f : bregproj::testing::all_kinds(4, s)) {
        const auto g = io::legendre_from_json(io::to_json(f));
        CHECK(g.kind() == f.kind());
        CHECK(g.dim() == f.dim());
        const Vector x = s.interior(f);
        CHECK(g.eval(x) == f.eval(x));
    }
    const auto q = io::legendre_from_json(json::parse(R"({"kind":"quadratic"})"), 3);
    CHECK(q.quadratic_form() == Matrix::Identity(3, 3));
    CHECK_THROWS_AS(io::legendre_from_json(json::parse(R"({"kind":"burg"})")), io::ParseError);
    CHECK_THROWS_AS(io::legendre_from_json(json::parse(R"({"kind":"power","dim":2})")), io::ParseError);
    CHECK_THROWS(io::legendre_from_json(json::parse(R"({"kind":"cosh","dim":2})")));
}

TEST_CASE("constraint sets round-trip") {
    Sampler s(2);
    std::vector<ConstraintSet> sets{ConstraintSet(Hyperplane{s.gaussian(3, 1).col(0), 0.5}, 4),
                                    ConstraintSet(Halfspace{s.gaussian(3, 1).col(0), -1.0}),
                                    ConstraintSet(GeneralAffine{s.gaussian(2, 3), s.gaussian(2, 1).col(0)}),
                                    ConstraintSet(OtMarginal{TensorShape({2, 3}), 1, s.probability(3)})};
    for (const auto& set : sets) {
        const json j = io::to_json(set);
        const auto back = io::constraint_set_from_json(j);
        CHECK(io::to_json(back) == j);
        CHECK(back.label() == set.label());
    }
    CHECK_THROWS_AS(io::constraint_set_from_json(json::parse(R"({"type":"ball"})")), io::ParseError);
    CHECK_THROWS_AS(io::constraint_set_from_json(json::parse(R"({"type":"hyperplane","a":[1,2]})")), io::ParseError);
}

TEST_CASE("controls, options and OT problems round-trip") {
    const auto c = ControlScheme::uniform(ControlKind::adaptive, 3, 99);
    const auto c2 = io::control_from_json(io::to_json(c), 3);
    CHECK(c2.kind == c.kind);
    CHECK(c2.seed == 99);
    CHECK(c2.mu == c.mu);
    CHECK(io::control_from_json(json::parse(R"({"control":"random"})"), 4).mu == std::vector<double>(4, 0.25));
    CHECK_THROWS(io::control_from_json(json::parse(R"({"control":"random","mu":[0.5,0.6]})"), 2));

    SolveOptions o;
    o.max_iterations = 17;
    o.stop_residual = 1e-7;
    o.trace_every = 3;
    o.compute_dc_trace = true;
    const auto o2 = io::options_from_json(io::to_json(o));
    CHECK(o2.max_iterations == 17);
    CHECK(o2.stop_residual == 1e-7);
    CHECK(o2.trace_every == 3);
    CHECK(o2.compute_dc_trace);

    Sampler s(3);
    OtProblem p;
    p.shape = TensorShape({2, 3});
    p.cost = s.uniform_vector(6, 0.0, 1.0);
    p.eta = 0.25;
    p.marginals = {s.probability(2), s.probability(3)};
    const auto p2 = io::ot_problem_from_json(io::to_json(p));
    CHECK(p2.cost == p.cost);
    CHECK(p2.marginals[1] == p.marginals[1]);
    CHECK(p2.eta == 0.25);
}

TEST_CASE("trace records and summaries") {
    TraceRecord r{3, 1, 0.25, 1e-3, 0.5, 1.5};
    const json j = io::to_json(r);
    for (const char* key : {"k", "xi", "d_sel", "res", "DC", "t_ms"}) CHECK(j.contains(key));
    const auto back = io::trace_record_from_json(j);
    CHECK(back.k == 3);
    CHECK(back.xi == 1);
    CHECK(back.dc == 0.5);
    r.dc.reset();
    CHECK(io::to_json(r)["DC"].is_null());
    CHECK_FALSE(io::trace_record_from_json(io::to_json(r)).dc.has_value());

    const auto loaded = io::load_problem_file(data_dir() / "tiny_quadratic.json");
    auto opts = loaded.options;
    opts.compute_dc_trace = true;
    const auto t = solve(loaded.problem, loaded.control, opts);
    const json sum = io::summary_json(t);
    CHECK(sum["status"] == "converged");
    CHECK(sum["iterations"] == t.iterations);
    CHECK(sum["x_final"].size() == 2);
    CHECK(sum["rates"].is_object());
    CHECK(io::summary_json(solve(loaded.problem, loaded.control, loaded.options))["rates"].is_null());
}

TEST_CASE("syntax errors carry line and column") {
    const std::string msg = parse_message("{\n  \"a\": 1,\n  \"b\": ]\n}");
    CHECK(msg.find("doc.json:3:") == 0);
    CHECK(parse_message("[1, 2]").empty());
}

TEST_CASE("problem documents") {
    const auto tiny = io::load_problem_file(data_dir() / "tiny_quadratic.json");
    CHECK(tiny.problem.sets.size() == 2);
    CHECK(tiny.control.kind == ControlKind::greedy);
    CHECK(tiny.problem.x0 == Vector::Zero(2));
    CHECK(tiny.options.max_iterations == 1000);

    const auto mm = io::load_problem_file(data_dir() / "sketched_mm.json");
    REQUIRE(mm.sketch.has_value());
    CHECK(mm.sketch->kind() == SketchKind::row_blocks);
    CHECK(mm.problem.sets.size() == 2);
    CHECK(mm.problem.x0 == Vector::Ones(4));
    const Matrix A = io::read_matrix_market(data_dir() / "small.mtx");
    CHECK(A.rows() == 3);
    CHECK(A.cols() == 4);

    const auto ot = io::load_problem_file(data_dir() / "ot_3x3x3.json");
    REQUIRE(ot.ot.has_value());
    CHECK(ot.problem.sets.size() == 3);
    CHECK(ot.problem.x0 == ot.ot->kernel().values());

    const auto sets = io::load_problem(json::parse(R"({"legendre":{"kind":"boltzmann_shannon","dim":2},
        "system":{"sets":[{"type":"hyperplane","a":[1,1],"b":1}]},"x0":[0.2,0.3]})"));
    CHECK(sets.problem.sets.size() == 1);
    CHECK(sets.control.kind == ControlKind::cyclic);

    const auto sk = io::load_problem(json::parse(R"({"system":{"A":[[1,0,0],[0,1,0],[0,0,1],[1,1,1]],"b":[1,1,1,3]},
        "sketch":{"kind":"gaussian","count":3,"tau":2,"seed":5}})"));
    CHECK(sk.problem.sets.size() == 3);

    CHECK_THROWS_AS(io::load_problem(json::parse(R"({"legendre":{"kind":"quadratic","dim":2}})")), io::ParseError);
    CHECK_THROWS_AS(io::load_problem(json::parse(R"({"legendre":{"kind":"burg"},"system":{"A":[[1,1]],"b":[1]}})")),
                    io::ParseError);
    CHECK_THROWS_AS(io::load_problem(json::parse(R"({"system":{"mm_path":"missing.mtx","b":[1]}})"), data_dir()),
                    io::ParseError);
    CHECK_THROWS(io::load_problem(json::parse(R"({"system":{"A":[[1,1],[1]],"b":[1,1]}})")));
    CHECK_THROWS(io::load_problem_file(data_dir() / "does_not_exist.json"));
}
