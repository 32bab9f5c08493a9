#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bregproj/batch.hpp"
#include "bregproj/ot.hpp"
#include "bregproj/solver.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bregproj;
using bregproj::testing::Sampler;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

FeasibilityProblem random_affine(const LegendreFunction& f, Sampler& s, int m, int rows_per_set) {
    const Vector z = s.interior(f);
    std::vector<ConstraintSet> sets;
    for (int i = 0; i < m; ++i) {
        const Matrix A = s.gaussian(rows_per_set, f.dim());
        if (rows_per_set == 1) sets.emplace_back(Hyperplane{A.row(0).transpose(), A.row(0).dot(z)});
        else sets.emplace_back(GeneralAffine{A, A * z});
    }
    return FeasibilityProblem::make(f, std::move(sets), s.interior(f));
}

std::vector<ControlScheme> every_control(std::size_t m, std::uint64_t seed) {
    return {ControlScheme::cyclic(), ControlScheme::greedy(), ControlScheme::uniform(ControlKind::random, m, seed),
            ControlScheme::uniform(ControlKind::adaptive, m, seed)};
}

} // namespace

TEST_CASE("feasible start gives an empty trace") {
    const auto f = LegendreFunction::identity_quadratic(2);
    auto p = FeasibilityProblem::make(f, {ConstraintSet(Hyperplane{v2(1, 1), 1.0})}, v2(0.5, 0.5));
    const auto t = solve(p, ControlScheme::greedy());
    CHECK(t.status == SolveStatus::converged);
    CHECK(t.iterations == 0);
    CHECK(t.records.empty());
    CHECK(fixed_target(p) == v2(0.5, 0.5));
}

TEST_CASE("greedy on two lines equals alternating orthogonal projections") {
    const auto f = LegendreFunction::identity_quadratic(2);
    const Vector a1 = v2(1, 2), a2 = v2(3, -1);
    const double b1 = 1.0, b2 = 2.0;
    const Vector x0 = v2(5, 5);
    auto p = FeasibilityProblem::make(f, {ConstraintSet(Hyperplane{a1, b1}), ConstraintSet(Hyperplane{a2, b2})}, x0);
    SolveOptions opts;
    opts.keep_iterates = true;
    opts.stop_residual = 1e-12;
    const auto t = solve(p, ControlScheme::greedy(), opts);
    REQUIRE(t.status == SolveStatus::converged);

    auto proj = [](const Vector& x, const Vector& a, double b) { return Vector(x - (a.dot(x) - b) / a.squaredNorm() * a); };
    auto dist = [](const Vector& x, const Vector& a, double b) { return std::pow(a.dot(x) - b, 2) / a.squaredNorm(); };
    int which = dist(x0, a1, b1) >= dist(x0, a2, b2) ? 0 : 1;
    Vector x = x0;
    for (std::size_t k = 1; k < t.iterates.size(); ++k) {
        x = which == 0 ? proj(x, a1, b1) : proj(x, a2, b2);
        which = 1 - which;
        CHECK((t.iterates[k] - x).norm() <= 1e-8);
    }
    for (std::size_t k = 1; k < t.records.size(); ++k) CHECK(t.records[k].xi != t.records[k - 1].xi);
    const Matrix A = (Matrix(2, 2) << a1.transpose(), a2.transpose()).finished();
    CHECK((t.x_final - A.inverse() * v2(b1, b2)).norm() <= 1e-10);
}

TEST_CASE("greedy over two OT marginals reproduces Sinkhorn iterates") {
    Sampler s(11);
    for (int t = 0; t < 5; ++t) {
        const int r = s.integer(2, 6), c = s.integer(2, 6);
        OtProblem ot;
        ot.shape = TensorShape({static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
        ot.cost = s.uniform_vector(r * c, 0.0, 1.0);
        ot.eta = 0.5;
        ot.marginals = {s.probability(r), s.probability(c)};
        SolveOptions opts;
        opts.keep_iterates = true;
        opts.stop_residual = 1e-12;
        const auto sol = solve_ot(ot, ControlScheme::greedy(), opts);

        const Vector kv = ot.kernel().values();
        const Matrix K = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(kv.data(), r, c);
        const Vector rows = K.rowwise().sum(), cols = K.colwise().sum().transpose();
        const int first = oracles::kl(ot.marginals[0], rows) >= oracles::kl(ot.marginals[1], cols) ? 0 : 1;
        const auto ref = oracles::reference_sinkhorn(K, ot.marginals[0], ot.marginals[1], 1e-13, first, true);
        const std::size_t steps = std::min(sol.trace.iterates.size(), ref.iterates.size());
        REQUIRE(steps > 2);
        for (std::size_t k = 0; k < steps; ++k) {
            const auto& it = sol.trace.iterates[k];
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) CHECK(std::abs(it[i * c + j] - ref.iterates[k](i, j)) <= 1e-12);
        }
    }
}

TEST_CASE("fixed target for the quadratic geometry is the minimal shift") {
    Sampler s(12);
    const auto f = LegendreFunction::identity_quadratic(6);
    for (int t = 0; t < 10; ++t) {
        auto p = random_affine(f, s, 3, 1);
        const auto& I = *p.intersection;
        const Vector expected = p.x0 - oracles::pinv(I.A) * (I.A * p.x0 - I.b);
        CHECK((fixed_target(p) - expected).norm() <= 1e-10);
    }
}

TEST_CASE("estimate_rate examples") {
    std::vector<double> dc;
    for (int k = 0; k < 30; ++k) dc.push_back(std::pow(0.3, k));
    const auto e = estimate_rate(std::span<const double>(dc));
    CHECK(e.global_rate == doctest::Approx(0.3));
    CHECK(e.tail_rate == doctest::Approx(0.3));
    CHECK(e.ratios == 29);

    std::vector<double> trunc(dc.begin(), dc.begin() + 12);
    trunc.push_back(0.0);
    trunc.push_back(0.0);
    CHECK(estimate_rate(std::span<const double>(trunc)).ratios == 11);
    std::vector<double> short_seq(dc.begin(), dc.begin() + 5);
    CHECK_THROWS_AS(estimate_rate(std::span<const double>(short_seq)), InvalidArgument);
}

TEST_CASE("telescoping identity, monotonicity and summability along every control") {
    Sampler s(13);
    const std::vector<LegendreFunction> fs{LegendreFunction::identity_quadratic(5), LegendreFunction::boltzmann_shannon(5),
                                           LegendreFunction::fermi_dirac(5), LegendreFunction::p_norm(5, 1.5)};
    for (const auto& f : fs) {
        for (int rows : {1, 2}) {
            auto p = random_affine(f, s, 3, rows);
            const Vector z = fixed_target(p);
            for (const auto& scheme : every_control(p.sets.size(), 3)) {
                CAPTURE(to_string(f.kind()));
                CAPTURE(to_string(scheme.kind));
                SolveOptions opts;
                opts.compute_dc_trace = true;
                opts.keep_iterates = true;
                opts.max_iterations = 60;
                const auto t = solve(p, scheme, opts);
                const auto dc = t.dc_sequence();
                REQUIRE(dc.size() == t.records.size() + 1);
                double summed = 0.0;
                double worst = 0.0;
                for (std::size_t k = 0; k < t.records.size(); ++k) {
                    const double lhs = dc[k + 1] + t.records[k].d_sel - dc[k];
                    CHECK(std::abs(lhs) <= 1e-7 * (1.0 + dc[0]));
                    CHECK(dc[k + 1] <= dc[k] + 1e-12 * (1.0 + dc[0]));
                    summed += divergence(f, t.iterates[k + 1], t.iterates[k]);
                    if (dc[k] > 1e-9 * dc[0]) worst = std::max(worst, 1.0 - t.records[k].d_sel / dc[k]);
                    CHECK((fixed_target(FeasibilityProblem::make(f, p.sets, t.iterates[k])) - z).norm() <=
                          1e-6 * (1.0 + z.norm()));
                }
                CHECK(summed <= divergence(f, z, p.x0) * (1.0 + 1e-8) + 1e-12);
                if (scheme.kind == ControlKind::greedy) {
                    CHECK(worst < 1.0);
                    for (std::size_t k = 1; k < t.records.size(); ++k) {
                        if (t.records[k].residual > opts.stop_residual) CHECK(t.records[k].xi != t.records[k - 1].xi);
                    }
                }
            }
        }
    }
}

TEST_CASE("halfspace families run under the same driver") {
    const auto f = LegendreFunction::boltzmann_shannon(2);
    std::vector<ConstraintSet> sets{ConstraintSet(Halfspace{v2(1, 1), 1.0}), ConstraintSet(Halfspace{v2(-1, 0), -0.2})};
    const auto p = FeasibilityProblem::make(f, sets, v2(2.0, 3.0));
    CHECK_FALSE(p.intersection.has_value());
    const auto t = solve(p, ControlScheme::cyclic());
    CHECK(t.status == SolveStatus::converged);
    CHECK(t.x_final.sum() <= 1.0 + 1e-8);
    CHECK(t.x_final[0] >= 0.2 - 1e-8);
    SolveOptions opts;
    opts.compute_dc_trace = true;
    CHECK_THROWS_AS(solve(p, ControlScheme::cyclic(), opts), InvalidArgument);
}

TEST_CASE("budget exhaustion, trace thinning and errors") {
    Sampler s(14);
    auto p = random_affine(LegendreFunction::identity_quadratic(4), s, 3, 1);
    SolveOptions opts;
    opts.max_iterations = 1;
    auto t = solve(p, ControlScheme::cyclic(), opts);
    CHECK(t.status == SolveStatus::budget_exhausted);
    CHECK(t.iterations == 1);

    opts.max_iterations = 20;
    opts.trace_every = 5;
    opts.stop_residual = 1e-300;
    t = solve(p, ControlScheme::cyclic(), opts);
    REQUIRE(t.records.size() == 4);
    CHECK(t.records[1].k == 5);

    CHECK_THROWS_AS(FeasibilityProblem::make(LegendreFunction::burg(2), {ConstraintSet(Hyperplane{v2(1, 1), 1.0})}, v2(-1, 1)),
                    DomainError);
    // Burg hyperplane {x : x1 + x2 = -1} has no positive point
    auto bad = FeasibilityProblem::make(LegendreFunction::burg(2), {ConstraintSet(Hyperplane{v2(1, 1), -1.0})}, v2(1, 1));
    CHECK_THROWS_AS(solve(bad, ControlScheme::cyclic()), SolveError);
}

TEST_CASE("batch results do not depend on the worker count") {
    Sampler s(15);
    auto p = random_affine(LegendreFunction::boltzmann_shannon(4), s, 3, 1);
    const auto scheme = ControlScheme::uniform(ControlKind::random, 3, 77);
    const auto one = run_batch(p, scheme, 40, 10, {}, 1);
    const auto four = run_batch(p, scheme, 40, 10, {}, 4);
    CHECK(one.mean_dc == four.mean_dc);
    CHECK(one.mean_ratio == four.mean_ratio);
    CHECK(one.mean_first_ratio == four.mean_first_ratio);
    CHECK(one.active == four.active);

    SolveOptions opts;
    opts.compute_dc_trace = true;
    opts.max_iterations = 10;
    opts.stop_residual = 1e-300;
    const auto single = run_batch(p, scheme, 1, 10, opts, 1);
    const auto direct = solve(p, scheme, opts, 0).dc_sequence();
    REQUIRE(single.mean_dc.size() == direct.size());
    for (std::size_t k = 0; k < direct.size(); ++k) CHECK(single.mean_dc[k] == direct[k]);
}
