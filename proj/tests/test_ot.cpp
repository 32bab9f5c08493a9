#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bregproj/ot.hpp"
#include "bregproj/rates.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace bregproj;
using bregproj::testing::Sampler;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

OtProblem random_ot(Sampler& s, std::vector<std::size_t> extents, double eta) {
    OtProblem p;
    p.shape = TensorShape(extents);
    p.cost = s.uniform_vector(static_cast<Eigen::Index>(p.shape.size()), 0.0, 1.0);
    p.eta = eta;
    for (auto n : extents) p.marginals.push_back(s.probability(static_cast<Eigen::Index>(n)));
    return p;
}

double marginal_residual(const OtProblem& p, const Vector& pi) {
    double r = 0.0;
    for (std::size_t i = 0; i < p.shape.order(); ++i) {
        r = std::max(r, (marginal(std::span<const double>(pi.data(), pi.size()), p.shape, i) - p.marginals[i])
                            .cwiseAbs()
                            .maxCoeff());
    }
    return r;
}

Matrix as_matrix(const Vector& v, Eigen::Index r, Eigen::Index c) {
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), r, c);
}

} // namespace

TEST_CASE("Gibbs kernel examples") {
    const TensorShape sq({2, 2});
    CHECK(gibbs_kernel(sq, Vector::Zero(4), 1.0).values() == Vector::Ones(4));
    const auto half = gibbs_kernel(sq, Vector::Constant(4, 0.3 * std::log(2.0)), 0.3);
    CHECK((half.values() - Vector::Constant(4, 0.5)).cwiseAbs().maxCoeff() <= 1e-15);
    const auto k = gibbs_kernel(sq, (Vector(4) << 0, 1, 1, 0).finished(), 1.0);
    CHECK(k.values()[1] == doctest::Approx(std::exp(-1.0)));
    CHECK(k.values()[0] == 1.0);
    CHECK_THROWS_AS(gibbs_kernel(sq, Vector::Constant(4, 800.0), 1.0), InvalidArgument);
    CHECK_THROWS_AS(gibbs_kernel(sq, Vector::Zero(4), 0.0), InvalidArgument);
}

TEST_CASE("marginal examples") {
    const TensorShape sq({2, 2});
    const Vector u = Vector::Constant(4, 0.25);
    CHECK(marginal(std::span<const double>(u.data(), 4), sq, 0) == v2(0.5, 0.5));
    CHECK(marginal(std::span<const double>(u.data(), 4), sq, 1) == v2(0.5, 0.5));

    const TensorShape cube({2, 2, 2});
    const Vector ones = Vector::Ones(8);
    for (std::size_t a = 0; a < 3; ++a) CHECK(marginal(std::span<const double>(ones.data(), 8), cube, a) == v2(4, 4));

    Sampler s(1);
    const Vector rho = s.uniform_vector(3, 0.1, 1.0), sigma = s.uniform_vector(4, 0.1, 1.0);
    Vector prod(12);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) prod[i * 4 + j] = rho[i] * sigma[j];
    const TensorShape rect({3, 4});
    CHECK((marginal(std::span<const double>(prod.data(), 12), rect, 0) - rho * sigma.sum()).norm() <= 1e-15);
    CHECK((marginal(std::span<const double>(prod.data(), 12), rect, 1) - sigma * rho.sum()).norm() <= 1e-15);
    CHECK(marginal_operator(rect, 1) * prod == marginal(std::span<const double>(prod.data(), 12), rect, 1));
}

TEST_CASE("marginal projection examples") {
    const CouplingTensor pi(TensorShape({2, 2}), Vector::Constant(4, 0.25));
    auto p = kl_project_marginal(pi, 0, v2(0.3, 0.7));
    CHECK((p.values() - (Vector(4) << 0.15, 0.15, 0.35, 0.35).finished()).norm() <= 1e-15);
    CHECK(p.total_mass() == doctest::Approx(1.0));
    p = kl_project_marginal(pi, 1, v2(0.5, 0.5));
    CHECK(p.values() == pi.values());

    const auto bs = LegendreFunction::boltzmann_shannon(4);
    const auto d = distance_to_set(bs, ConstraintSet(OtMarginal{pi.shape(), 0, v2(0.3, 0.7)}), pi.values());
    CHECK(d.distance == doctest::Approx(0.3 * std::log(0.6) + 0.7 * std::log(1.4)).epsilon(1e-12));
    CHECK(std::abs(d.distance - divergence(bs, d.projection, pi.values())) <= 1e-10);

    const CouplingTensor hole(TensorShape({2, 2}), (Vector(4) << 0.0, 0.0, 0.5, 0.5).finished());
    CHECK_THROWS_AS(kl_project_marginal(hole, 0, v2(0.5, 0.5)), DomainError);
    CHECK(kl_project_marginal(hole, 0, v2(0.0, 1.0)).total_mass() == doctest::Approx(1.0));
}

TEST_CASE("mass bookkeeping after every marginal projection") {
    Sampler s(2);
    for (int t = 0; t < 20; ++t) {
        const auto p = random_ot(s, {3, 4, 2}, 0.7);
        CouplingTensor pi = p.kernel();
        for (std::size_t a = 0; a < 3; ++a) {
            pi = kl_project_marginal(pi, a, p.marginals[a]);
            CHECK(pi.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
            CHECK((marginal(pi, a) - p.marginals[a]).cwiseAbs().maxCoeff() <= 1e-15);
        }
    }
}

TEST_CASE("uniform kernel with uniform marginals gives the product after one pass") {
    OtProblem p;
    p.shape = TensorShape({3, 3});
    p.cost = Vector::Zero(9);
    p.eta = 1.0;
    p.marginals = {Vector::Constant(3, 1.0 / 3), Vector::Constant(3, 1.0 / 3)};
    const auto sol = solve_ot(p, ControlScheme::cyclic());
    CHECK(sol.trace.iterations == 1);
    CHECK((sol.plan.values() - Vector::Constant(9, 1.0 / 9)).cwiseAbs().maxCoeff() <= 1e-16);
}

TEST_CASE("two-marginal instance matches the reference Sinkhorn fixed point") {
    OtProblem p;
    p.shape = TensorShape({2, 2});
    p.cost = (Vector(4) << 0, 1, 1, 0).finished();
    p.eta = 1.0;
    p.marginals = {v2(0.5, 0.5), v2(0.5, 0.5)};
    SolveOptions opts;
    opts.stop_residual = 1e-14;
    const auto sol = solve_ot(p, ControlScheme::greedy(), opts);
    const auto ref = oracles::reference_sinkhorn(as_matrix(p.kernel().values(), 2, 2), p.marginals[0], p.marginals[1], 1e-14);
    CHECK((as_matrix(sol.plan.values(), 2, 2) - ref.plan).cwiseAbs().maxCoeff() <= 1e-10);

    Sampler s(3);
    for (int t = 0; t < 10; ++t) {
        const int r = s.integer(2, 10), c = s.integer(2, 10);
        const auto q = random_ot(s, {static_cast<std::size_t>(r), static_cast<std::size_t>(c)}, 0.3);
        const auto so = solve_ot(q, ControlScheme::greedy(), opts);
        const auto rf = oracles::reference_sinkhorn(as_matrix(q.kernel().values(), r, c), q.marginals[0], q.marginals[1], 1e-14);
        CHECK((as_matrix(so.plan.values(), r, c) - rf.plan).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("three marginals: feasibility and optimality sanity") {
    Sampler s(4);
    for (int t = 0; t < 5; ++t) {
        const auto p = random_ot(s, {3, 3, 3}, 1.0);
        SolveOptions opts;
        opts.stop_residual = 1e-10;
        const auto sol = solve_ot(p, ControlScheme::greedy(), opts);
        REQUIRE(sol.trace.status == SolveStatus::converged);
        CHECK(marginal_residual(p, sol.plan.values()) <= 1e-8);
        Vector prod(27);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) prod[9 * i + 3 * j + k] = p.marginals[0][i] * p.marginals[1][j] * p.marginals[2][k];
        const Vector kappa = p.kernel().values();
        CHECK(oracles::kl(sol.plan.values(), kappa) <= oracles::kl(prod, kappa) + 1e-12);
        CHECK(sol.plan.values().minCoeff() > 0.0);
    }
}

TEST_CASE("row sets: counting, single-row scaling and agreement with full marginals") {
    Sampler s(5);
    const auto p = random_ot(s, {2, 2}, 1.0);
    const auto rows = greenkhorn_sets(p);
    CHECK(rows.size() == 4);
    CHECK(greenkhorn_sets(random_ot(s, {3, 4, 5}, 1.0)).size() == 12);

    const auto f = LegendreFunction::boltzmann_shannon(4);
    const Vector pi = p.kernel().values();
    const auto* h = std::get_if<Hyperplane>(&rows[1].representation());
    REQUIRE(h != nullptr);
    const Vector projected = project(f, rows[1], pi);
    Vector scaled = pi;
    const double factor = h->b / h->a.dot(pi);
    for (int j = 0; j < 4; ++j)
        if (h->a[j] != 0.0) scaled[j] *= factor;
    CHECK((projected - scaled).cwiseAbs().maxCoeff() <= 1e-14);

    SolveOptions opts;
    opts.stop_residual = 1e-12;
    opts.max_iterations = 100000;
    for (int t = 0; t < 3; ++t) {
        const auto q = random_ot(s, {2 + static_cast<std::size_t>(t), 3, 2}, 0.8);
        const auto full = solve_ot(q, ControlScheme::greedy(), opts);
        const auto greenkhorn = solve_ot(q, ControlScheme::greedy(), opts, true);
        REQUIRE(greenkhorn.trace.status == SolveStatus::converged);
        CHECK((full.plan.values() - greenkhorn.plan.values()).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("greedy distance identity and monotone decay") {
    Sampler s(6);
    for (int t = 0; t < 3; ++t) {
        const auto p = random_ot(s, {3, 4, 3}, 0.05);
        const auto problem = to_feasibility(p, false);
        SolveOptions opts;
        opts.compute_dc_trace = true;
        opts.keep_iterates = true;
        opts.stop_residual = 1e-12;
        opts.max_iterations = 400;
        const auto tr = solve(problem, ControlScheme::greedy(), opts);
        const auto f = problem.f;
        for (std::size_t k = 0; k < tr.records.size(); ++k) {
            const Vector& x = tr.iterates[k];
            double best = 0.0;
            for (std::size_t a = 0; a < 3; ++a) {
                const Vector m = marginal(std::span<const double>(x.data(), x.size()), p.shape, a);
                best = std::max(best, oracles::kl(p.marginals[a], m));
            }
            CHECK(std::abs(tr.records[k].d_sel - best) <= 1e-12 * (1.0 + best));
            CHECK(x.minCoeff() > 0.0);
        }
        const auto dc = tr.dc_sequence();
        for (std::size_t k = 0; k + 1 < dc.size(); ++k) CHECK(dc[k + 1] <= dc[k] * (1.0 + 1e-9) + 1e-15);

        const auto est = estimate_rate(std::span<const double>(dc), 1e-10);
        CHECK(est.tail_rate <= 1.0);
        const std::vector<double> mu(3, 1.0 / 3);
        const double g = gamma_random(f, problem.sets, mu, tr.x_final);
        CHECK(est.tail_rate <= 1.0 - g * (1.0 - 0.2));
    }
}

TEST_CASE("problem validation") {
    Sampler s(7);
    auto p = random_ot(s, {2, 3}, 1.0);
    p.marginals[1] = Vector::Constant(3, 0.5);
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = random_ot(s, {2, 3}, 1.0);
    p.cost = Vector::Zero(5);
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = random_ot(s, {2, 3}, 1e-3);
    p.cost = Vector::Ones(6);
    CHECK_THROWS_AS(static_cast<void>(p.kernel()), InvalidArgument);
}
