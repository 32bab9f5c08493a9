#include "bregproj/rates.hpp"

#include <algorithm>
#include <cmath>

#include "bregproj/controls.hpp"
#include "bregproj/linalg.hpp"

namespace bregproj {
namespace {

void require_point(const LegendreFunction& f, const Vector& x) {
    if (x.size() != f.dim()) throw InvalidArgument("x_star has the wrong dimension");
    if (!f.in_interior(x)) throw DomainError("x_star must lie in int(dom phi)");
}

Matrix hessian_of_conjugate(const LegendreFunction& f, const Vector& x) { return f.conj_hess(f.grad(x)); }

std::vector<Matrix> restricted_projectors(const std::vector<Matrix>& Q, const Matrix& U) {
    std::vector<Matrix> M;
    M.reserve(Q.size());
    for (const auto& q : Q) {
        Matrix r = U.transpose() * q * U;
        M.push_back(0.5 * (r + r.transpose()));
    }
    return M;
}

double max_form(const std::vector<Matrix>& M, const Vector& c) {
    double best = 0.0;
    for (const auto& m : M) best = std::max(best, c.dot(m * c));
    return best;
}

// tau * log sum_i exp(q_i / tau) and its Euclidean gradient.
double smoothed(const std::vector<Matrix>& M, const Vector& c, double tau, Vector* grad) {
    std::vector<double> q(M.size());
    double qmax = -kInfinity;
    for (std::size_t i = 0; i < M.size(); ++i) {
        q[i] = c.dot(M[i] * c);
        qmax = std::max(qmax, q[i]);
    }
    double z = 0.0;
    for (double v : q) z += std::exp((v - qmax) / tau);
    if (grad != nullptr) {
        grad->setZero(c.size());
        for (std::size_t i = 0; i < M.size(); ++i) {
            const double w = std::exp((q[i] - qmax) / tau) / z;
            if (w > 0.0) *grad += (2.0 * w) * (M[i] * c);
        }
    }
    return qmax + tau * std::log(z);
}

Vector descend(const std::vector<Matrix>& M, Vector c, const GreedyGammaOptions& opts) {
    for (double tau : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
        double step = 1.0;
        Vector g;
        double value = smoothed(M, c, tau, &g);
        for (int it = 0; it < opts.steps; ++it) {
            const Vector riem = g - c.dot(g) * c;
            if (riem.cwiseAbs().maxCoeff() < opts.gradient_tol) break;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                Vector trial = c - step * riem;
                trial.normalize();
                Vector gt;
                const double vt = smoothed(M, trial, tau, &gt);
                if (vt <= value - 1e-4 * step * riem.squaredNorm()) {
                    c = std::move(trial);
                    g = std::move(gt);
                    value = vt;
                    moved = true;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
    }
    return c;
}

} // namespace

Matrix hessian_root(const LegendreFunction& f, const Vector& x) {
    require_point(f, x);
    if (f.separable()) return f.conj_hess_diag(f.grad(x)).cwiseMax(0.0).cwiseSqrt().asDiagonal();
    return linalg::sym_sqrt(hessian_of_conjugate(f, x));
}

Matrix projector_Q(const LegendreFunction& f, const Matrix& A_i, const Vector& x_star) {
    if (A_i.cols() != f.dim()) throw InvalidArgument("projector_Q: operator has the wrong number of columns");
    const Matrix H = hessian_root(f, x_star);
    const Matrix HA = H * A_i.transpose();
    const Eigen::Index n = f.dim();
    if (HA.cwiseAbs().maxCoeff() == 0.0) return Matrix::Zero(n, n);
    Matrix Q = HA * linalg::pseudo_inverse(HA.transpose() * HA) * HA.transpose();
    return 0.5 * (Q + Q.transpose());
}

double gamma_random(const LegendreFunction& f, const std::vector<ConstraintSet>& sets, const std::vector<double>& mu,
                    const Vector& x_star) {
    if (mu.size() != sets.size()) throw InvalidArgument("gamma_random: mu and sets differ in length");
    const Eigen::Index n = f.dim();
    Matrix Qbar = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (mu[i] == 0.0) continue;
        Qbar += mu[i] * projector_Q(f, sets[i].dense_operator(), x_star);
    }
    const double g = linalg::smallest_nonzero_eigenvalue(Qbar);
    if (!(g > 0.0)) throw InvalidArgument("gamma_random: averaged projector is numerically zero");
    return std::min(g, 1.0);
}

double sphere_minmax(const std::vector<Matrix>& M, const GreedyGammaOptions& opts) {
    if (M.empty()) throw InvalidArgument("sphere_minmax: no forms");
    const Eigen::Index d = M.front().rows();
    if (d == 0) throw InvalidArgument("sphere_minmax: empty subspace");
    if (d == 1) return max_form(M, Vector::Ones(1));

    std::vector<Vector> starts;
    for (Eigen::Index j = 0; j < d && static_cast<int>(starts.size()) < opts.starts; ++j) {
        starts.push_back(Vector::Unit(d, j));
    }
    Rng rng(opts.seed);
    while (static_cast<int>(starts.size()) < std::max(opts.starts, 1)) {
        Vector c(d);
        for (Eigen::Index j = 0; j < d; ++j) c[j] = rng.normal();
        if (c.norm() == 0.0) continue;
        starts.push_back(c.normalized());
    }
    double best = kInfinity;
    for (const auto& c0 : starts) best = std::min(best, max_form(M, descend(M, c0, opts)));
    return best;
}

GreedyGamma gamma_greedy(const LegendreFunction& f, const std::vector<ConstraintSet>& sets, const Vector& x_star,
                         const GreedyGammaOptions& opts) {
    if (sets.empty()) throw InvalidArgument("gamma_greedy: empty family");
    const Matrix H = hessian_root(f, x_star);
    const GeneralAffine stacked = stack_sets(sets);
    const Matrix U = linalg::range_basis(H * stacked.A.transpose());
    if (U.cols() == 0) throw InvalidArgument("gamma_greedy: V(x_star) = {0}; A Hess phi*(grad phi(x_star)) vanishes");

    std::vector<Matrix> Q;
    Q.reserve(sets.size());
    for (const auto& s : sets) Q.push_back(projector_Q(f, s.dense_operator(), x_star));

    GreedyGamma out;
    const std::vector<double> uniform(sets.size(), 1.0 / static_cast<double>(sets.size()));
    out.lower = gamma_random(f, sets, uniform, x_star);
    out.estimate = std::min(1.0, sphere_minmax(restricted_projectors(Q, U), opts));
    out.estimate = std::max(out.estimate, out.lower);
    return out;
}

KaczmarzRates kaczmarz_rates(const LegendreFunction& f, const Matrix& A, const Vector& x_star,
                             const GreedyGammaOptions& opts) {
    if (A.cols() != f.dim() || A.rows() == 0) throw InvalidArgument("kaczmarz_rates: operator has the wrong shape");
    const Matrix H = hessian_root(f, x_star);
    const Matrix AH = A * H;
    const Eigen::Index m = A.rows();
    KaczmarzRates out;
    out.normalized = AH;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double w = AH.row(i).norm();
        if (!(w > 0.0)) throw InvalidArgument("kaczmarz_rates: row " + std::to_string(i) + " vanishes after weighting");
        out.normalized.row(i) /= w;
    }
    const Matrix& Abar = out.normalized;
    out.sigma_random = 1.0 - linalg::smallest_nonzero_eigenvalue(Abar.transpose() * Abar) / static_cast<double>(m);

    const Matrix U = linalg::range_basis(Abar.transpose());
    std::vector<Matrix> M;
    M.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vector r = U.transpose() * Abar.row(i).transpose();
        M.push_back(r * r.transpose());
    }
    out.sigma_greedy = 1.0 - std::min(1.0, sphere_minmax(M, opts));
    return out;
}

H2Check check_H2(const LegendreFunction& f, const std::vector<ConstraintSet>& sets, const Vector& x_star) {
    require_point(f, x_star);
    const Matrix S = hessian_of_conjugate(f, x_star);
    H2Check out;
    bool nonzero = false;
    for (const auto& s : sets) {
        const Matrix A = s.dense_operator();
        const Matrix AS = A * S;
        nonzero = nonzero || AS.cwiseAbs().maxCoeff() > 0.0;
        const Matrix op = A.transpose() * linalg::pseudo_inverse(AS * A.transpose()) * A;
        out.sup_norm = std::max(out.sup_norm, linalg::operator_norm(op));
    }
    out.holds = nonzero;
    return out;
}

Matrix averaged_sketch_projector(const Matrix& A, const std::vector<Matrix>& sketches, const std::vector<double>& mu) {
    if (sketches.size() != mu.size()) throw InvalidArgument("sketch weights and sketches differ in length");
    const Eigen::Index m = A.rows();
    const Matrix AAt = A * A.transpose();
    Matrix E = Matrix::Zero(m, m);
    for (std::size_t i = 0; i < sketches.size(); ++i) {
        const Matrix& S = sketches[i];
        if (S.rows() != m) throw InvalidArgument("sketch has the wrong number of rows");
        E += mu[i] * (S * linalg::pseudo_inverse(S.transpose() * AAt * S) * S.transpose());
    }
    return 0.5 * (E + E.transpose());
}

bool check_exactness(const Matrix& A, const Matrix& E) {
    if (E.rows() != A.rows() || E.cols() != A.rows()) throw InvalidArgument("check_exactness: E must be m x m");
    const Matrix R = linalg::range_basis(A);
    const Matrix K = linalg::kernel_basis(E);
    if (R.cols() == 0 || K.cols() == 0) return true;
    Matrix stacked(A.rows(), R.cols() + K.cols());
    stacked << R, K;
    return linalg::numerical_rank(stacked) == R.cols() + K.cols();
}

RateReport rate_report(const LegendreFunction& f, const std::vector<ConstraintSet>& sets, const std::vector<double>& mu,
                       const Vector& x_star, const GreedyGammaOptions& opts) {
    RateReport r;
    const auto h2 = check_H2(f, sets, x_star);
    r.h2_holds = h2.holds;
    r.h2_sup_norm = h2.sup_norm;
    if (!h2.holds) {
        r.notes.emplace_back("A Hess phi*(grad phi(x_star)) = 0: local rate constants are undefined");
        return r;
    }
    const auto g = gamma_greedy(f, sets, x_star, opts);
    r.gamma_greedy_lower = g.lower;
    r.gamma_greedy = g.estimate;
    r.gamma_random = gamma_random(f, sets, mu, x_star);
    r.local_greedy_rate = 1.0 - r.gamma_greedy;
    r.local_random_rate = 1.0 - r.gamma_random;
    const bool rows_only = std::all_of(sets.begin(), sets.end(), [](const ConstraintSet& s) {
        return std::holds_alternative<Hyperplane>(s.representation());
    });
    const bool uniform = std::all_of(mu.begin(), mu.end(), [&](double w) {
        return std::abs(w - 1.0 / static_cast<double>(mu.size())) <= 1e-12;
    });
    if (rows_only) {
        r.kaczmarz = kaczmarz_rates(f, stack_sets(sets).A, x_star, opts);
        if (!uniform) r.notes.emplace_back("row-action sigma_random assumes uniform sampling");
    }
    r.notes.emplace_back("gamma_greedy is a multi-start estimate (upper bound); gamma_greedy_lower is certified");
    return r;
}

} // namespace bregproj
