#include "bregproj/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bregproj/kernels.hpp"

namespace bregproj {
namespace {

std::span<const double> view(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void require_interior(const LegendreFunction& f, const Vector& x, const char* what) {
    if (x.size() != f.dim()) {
        throw InvalidArgument(std::string(what) + ": point has dimension " + std::to_string(x.size()) +
                              ", Legendre function has " + std::to_string(f.dim()));
    }
    if (!f.in_interior(x)) throw DomainError(std::string(what) + ": starting point is not in int(dom phi)");
}

// The scalar root problem g(lambda) = sum_j a_j grad varphi*(y_j + lambda a_j) - b
// restricted to the support of a.
class HyperplaneDual {
public:
    HyperplaneDual(const LegendreFunction& f, const Vector& a, double b, const Vector& x) : f_(f), b_(b) {
        for (Eigen::Index j = 0; j < a.size(); ++j) {
            if (a[j] != 0.0) support_.push_back(j);
        }
        coef_.resize(static_cast<Eigen::Index>(support_.size()));
        base_.resize(coef_.size());
        for (std::size_t k = 0; k < support_.size(); ++k) {
            const auto j = support_[k];
            coef_[static_cast<Eigen::Index>(k)] = a[j];
            base_[static_cast<Eigen::Index>(k)] = f.scalar_grad(x[j]);
        }
        lower_ = -kInfinity;
        upper_ = kInfinity;
        const double cap = f.conj_domain_upper();
        if (std::isfinite(cap)) {
            for (Eigen::Index k = 0; k < coef_.size(); ++k) {
                const double edge = (cap - base_[k]) / coef_[k];
                if (coef_[k] > 0.0) upper_ = std::min(upper_, edge);
                else lower_ = std::max(lower_, edge);
            }
        }
    }

    [[nodiscard]] double lower() const { return lower_; }
    [[nodiscard]] double upper() const { return upper_; }

    [[nodiscard]] bool admissible(double lambda) const {
        if (!(lambda > lower_ && lambda < upper_)) return false;
        for (Eigen::Index k = 0; k < coef_.size(); ++k) {
            if (!f_.scalar_in_conj_domain(base_[k] + lambda * coef_[k])) return false;
        }
        return true;
    }

    // (g, g') at an admissible lambda.
    [[nodiscard]] std::pair<double, double> eval(double lambda, Vector& primal) const {
        double slope = 0.0;
        for (Eigen::Index k = 0; k < coef_.size(); ++k) {
            const double s = base_[k] + lambda * coef_[k];
            primal[k] = f_.scalar_conj_grad(s);
            slope += coef_[k] * coef_[k] * f_.scalar_conj_hess(s);
        }
        return {kernels::dot(view(coef_), view(primal)) - b_, slope};
    }

    [[nodiscard]] Eigen::Index support_size() const { return coef_.size(); }
    [[nodiscard]] const std::vector<Eigen::Index>& support() const { return support_; }

private:
    const LegendreFunction& f_;
    double b_;
    std::vector<Eigen::Index> support_;
    Vector coef_;
    Vector base_;
    double lower_;
    double upper_;
};

HyperplaneProjection project_hyperplane_separable(const LegendreFunction& f, const Vector& a, double b,
                                                  const Vector& x, const DualSolveOptions& opts) {
    const HyperplaneDual dual(f, a, b, x);
    Vector primal(dual.support_size());
    const double tol = opts.residual_tolerance;

    auto [g0, d0] = dual.eval(0.0, primal);
    double best = 0.0;
    double best_g = g0;
    double best_d = d0;

    // Bracket [lo, hi] with g(lo) <= 0 <= g(hi), g nondecreasing.
    double lo = 0.0;
    double hi = 0.0;
    if (g0 != 0.0) {
        const double dir = g0 > 0.0 ? -1.0 : 1.0;
        const double bound = dir > 0.0 ? dual.upper() : dual.lower();
        double step = (d0 > 0.0 && std::isfinite(d0)) ? std::abs(g0) / d0 : 1.0;
        double prev = 0.0;
        bool found = false;
        for (int attempt = 0; attempt < 400 && !found; ++attempt) {
            double trial = prev + dir * step;
            if (std::isfinite(bound) && !(dir * (bound - trial) > 0.0)) trial = prev + 0.5 * (bound - prev);
            if (trial == prev || !dual.admissible(trial)) {
                throw BracketError("hyperplane projection: dual root could not be bracketed inside dom(phi*)");
            }
            const auto [gt, dt] = dual.eval(trial, primal);
            if (std::abs(gt) < std::abs(best_g)) {
                best = trial;
                best_g = gt;
                best_d = dt;
            }
            if ((dir > 0.0 && gt >= 0.0) || (dir < 0.0 && gt <= 0.0)) {
                found = true;
                lo = std::min(prev, trial);
                hi = std::max(prev, trial);
            } else {
                prev = trial;
                step *= 2.0;
            }
        }
        if (!found) throw BracketError("hyperplane projection: dual root could not be bracketed");
    }

    // Safeguarded Newton with bisection fallback.
    double lambda = best;
    double g = best_g;
    double slope = best_d;
    int iter = 0;
    for (; iter < opts.max_newton_iterations && std::abs(g) > tol; ++iter) {
        double next = (slope > 0.0) ? lambda - g / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi) || !dual.admissible(next)) next = 0.5 * (lo + hi);
        if (next == lo || next == hi) break; // bracket collapsed to adjacent floats
        std::tie(g, slope) = dual.eval(next, primal);
        lambda = next;
        if (g > 0.0) hi = lambda;
        else if (g < 0.0) lo = lambda;
    }
    if (std::abs(g) > tol && !(std::nextafter(lo, hi) >= hi)) {
        throw ConvergenceError("hyperplane projection: no convergence after " + std::to_string(iter) +
                               " Newton iterations (|residual| = " + std::to_string(std::abs(g)) + ")");
    }
    // Polish to roundoff while Newton keeps improving the residual.
    for (int polish = 0; polish < 3 && g != 0.0 && slope > 0.0; ++polish) {
        const double next = lambda - g / slope;
        if (!dual.admissible(next)) break;
        Vector trial_primal(primal.size());
        const auto [gt, dt] = dual.eval(next, trial_primal);
        if (!(std::abs(gt) < std::abs(g))) break;
        lambda = next;
        g = gt;
        slope = dt;
        primal = trial_primal;
    }
    (void)dual.eval(lambda, primal);

    HyperplaneProjection out{x, lambda};
    const auto& support = dual.support();
    for (std::size_t k = 0; k < support.size(); ++k) out.x[support[k]] = primal[static_cast<Eigen::Index>(k)];
    return out;
}

// Psi up to the constant -phi*(grad phi(x)); +inf outside dom(phi*).
double dual_value(const LegendreFunction& f, const Matrix& A, const Vector& b, const Vector& y, const Vector& lambda) {
    const Vector z = y + A.transpose() * lambda;
    if (!f.in_conj_domain(z)) return kInfinity;
    return f.conj_eval(z) - lambda.dot(b);
}

Matrix dual_hessian(const LegendreFunction& f, const Matrix& A, const Vector& z) {
    if (f.separable()) {
        const Vector h = f.conj_hess_diag(z);
        return A * h.asDiagonal() * A.transpose();
    }
    return A * f.conj_hess(z) * A.transpose();
}

Vector newton_direction(const Matrix& H, const Vector& grad) {
    const Eigen::Index m = H.rows();
    Eigen::LLT<Matrix> llt(H);
    const double diag_max = H.diagonal().cwiseAbs().maxCoeff();
    auto well_posed = [&](const Eigen::LLT<Matrix>& c) {
        if (c.info() != Eigen::Success) return false;
        const Vector d = c.matrixLLT().diagonal();
        return d.minCoeff() > 1e-7 * std::sqrt(diag_max);
    };
    if (well_posed(llt)) return llt.solve(-grad);
    // Rank-deficient: minimum-norm step through the pseudo-inverse, so no
    // component along Ker(A^T) is amplified.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (H + H.transpose()));
    if (eig.info() != Eigen::Success) {
        throw ConvergenceError("affine projection: dual Newton system could not be factorized");
    }
    const Vector& ev = eig.eigenvalues();
    const double cut = 1e-12 * ev.cwiseAbs().maxCoeff();
    const Vector proj = eig.eigenvectors().transpose() * grad;
    Vector coef = Vector::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        if (ev[k] > cut) coef[k] = -proj[k] / ev[k];
    }
    return eig.eigenvectors() * coef;
}

} // namespace

void DualSolveOptions::validate() const {
    if (!(residual_tolerance > 0.0)) throw InvalidArgument("residual_tolerance must be positive");
    if (max_newton_iterations < 1) throw InvalidArgument("max_newton_iterations must be positive");
    if (!(line_search_shrink > 0.0 && line_search_shrink < 1.0)) {
        throw InvalidArgument("line_search_shrink must lie in (0, 1)");
    }
}

// ---------------------------------------------------------------------------
// Constraint sets

ConstraintSet::ConstraintSet(Hyperplane h, int label) : rep_(std::move(h)), label_(label) { validate(); }
ConstraintSet::ConstraintSet(GeneralAffine g, int label) : rep_(std::move(g)), label_(label) { validate(); }
ConstraintSet::ConstraintSet(OtMarginal m, int label) : rep_(std::move(m)), label_(label) { validate(); }
ConstraintSet::ConstraintSet(Halfspace h, int label) : rep_(std::move(h)), label_(label) { validate(); }

void ConstraintSet::validate() const {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Hyperplane> || std::is_same_v<T, Halfspace>) {
                if (s.a.size() == 0 || !s.a.allFinite() || !std::isfinite(s.b)) {
                    throw InvalidArgument("hyperplane/halfspace data must be finite and nonempty");
                }
                if (s.a.cwiseAbs().maxCoeff() == 0.0) throw InvalidArgument("hyperplane normal must be nonzero");
            } else if constexpr (std::is_same_v<T, GeneralAffine>) {
                if (s.A.rows() != s.b.size() || s.A.size() == 0) {
                    throw InvalidArgument("affine set: A and b have inconsistent sizes");
                }
                if (!s.A.allFinite() || !s.b.allFinite()) throw InvalidArgument("affine set data must be finite");
                if (s.A.cwiseAbs().maxCoeff() == 0.0) throw InvalidArgument("affine set operator must be nonzero");
            } else {
                if (s.axis >= s.shape.order()) throw InvalidArgument("marginal axis out of range");
                if (static_cast<std::size_t>(s.target.size()) != s.shape.extent(s.axis)) {
                    throw InvalidArgument("marginal target length does not match the axis extent");
                }
                if (s.target.minCoeff() < 0.0 || std::abs(s.target.sum() - 1.0) > 1e-12) {
                    throw InvalidArgument("marginal target must be a probability vector");
                }
            }
        },
        rep_);
}

Eigen::Index ConstraintSet::ambient_dim() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GeneralAffine>) return s.A.cols();
            else if constexpr (std::is_same_v<T, OtMarginal>) return static_cast<Eigen::Index>(s.shape.size());
            else return s.a.size();
        },
        rep_);
}

Eigen::Index ConstraintSet::rows() const {
    return std::visit(
        [](const auto& s) -> Eigen::Index {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GeneralAffine>) return s.A.rows();
            else if constexpr (std::is_same_v<T, OtMarginal>) return s.target.size();
            else return 1;
        },
        rep_);
}

Matrix ConstraintSet::dense_operator() const {
    return std::visit(
        [](const auto& s) -> Matrix {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GeneralAffine>) return s.A;
            else if constexpr (std::is_same_v<T, OtMarginal>) return marginal_operator(s.shape, s.axis);
            else return s.a.transpose();
        },
        rep_);
}

Vector ConstraintSet::rhs() const {
    return std::visit(
        [](const auto& s) -> Vector {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GeneralAffine>) return s.b;
            else if constexpr (std::is_same_v<T, OtMarginal>) return s.target;
            else return Vector::Constant(1, s.b);
        },
        rep_);
}

double ConstraintSet::residual(const Vector& x) const {
    if (x.size() != ambient_dim()) throw InvalidArgument("constraint residual: dimension mismatch");
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Hyperplane>) return std::abs(kernels::dot(view(s.a), view(x)) - s.b);
            else if constexpr (std::is_same_v<T, Halfspace>) return std::max(0.0, kernels::dot(view(s.a), view(x)) - s.b);
            else if constexpr (std::is_same_v<T, GeneralAffine>) return (s.A * x - s.b).cwiseAbs().maxCoeff();
            else return (marginal(view(x), s.shape, s.axis) - s.target).cwiseAbs().maxCoeff();
        },
        rep_);
}

// ---------------------------------------------------------------------------
// Divergences and the dual function

double divergence(const LegendreFunction& f, const Vector& x, const Vector& y) {
    if (x.size() != f.dim() || y.size() != f.dim()) throw InvalidArgument("divergence: dimension mismatch");
    if (!f.separable()) {
        if (!x.allFinite() || !y.allFinite()) return kInfinity;
        const Vector d = x - y;
        return 0.5 * d.dot(f.quadratic_form() * d);
    }
    double acc = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double d = f.scalar_divergence(x[j], y[j]);
        if (!std::isfinite(d)) return kInfinity;
        acc += d;
    }
    return acc;
}

double conj_divergence(const LegendreFunction& f, const Vector& u, const Vector& v) {
    if (!f.in_conj_domain(u) || !f.in_conj_domain(v)) return kInfinity;
    return f.conj_eval(u) - f.conj_eval(v) - (u - v).dot(f.conj_grad(v));
}

double dual_objective(const LegendreFunction& f, const Matrix& A, const Vector& b, const Vector& x,
                      const Vector& lambda) {
    require_interior(f, x, "dual_objective");
    if (A.rows() != b.size() || A.rows() != lambda.size() || A.cols() != x.size()) {
        throw InvalidArgument("dual_objective: inconsistent sizes");
    }
    const Vector y = f.grad(x);
    const Vector z = y + A.transpose() * lambda;
    if (!f.in_conj_domain(z)) return kInfinity;
    return f.conj_eval(z) - f.conj_eval(y) - lambda.dot(b);
}

Vector dual_gradient(const LegendreFunction& f, const Matrix& A, const Vector& b, const Vector& x,
                     const Vector& lambda) {
    require_interior(f, x, "dual_gradient");
    const Vector z = f.grad(x) + A.transpose() * lambda;
    return A * f.conj_grad(z) - b;
}

// ---------------------------------------------------------------------------
// Projections

HyperplaneProjection project_hyperplane(const LegendreFunction& f, const Vector& a, double b, const Vector& x,
                                        const DualSolveOptions& opts) {
    opts.validate();
    require_interior(f, x, "project_hyperplane");
    if (a.size() != x.size()) throw InvalidArgument("project_hyperplane: normal has the wrong dimension");
    if (a.cwiseAbs().maxCoeff() == 0.0) throw InvalidArgument("project_hyperplane: normal must be nonzero");

    const double r0 = kernels::dot(view(a), view(x)) - b;
    if (std::abs(r0) <= opts.residual_tolerance) return {x, 0.0};

    if (!f.separable()) {
        // g is affine in lambda: one Newton step is exact.
        const Eigen::LLT<Matrix> chol(f.quadratic_form());
        const Vector w = chol.solve(a);
        const double lambda = -r0 / a.dot(w);
        return {x + lambda * w, lambda};
    }
    return project_hyperplane_separable(f, a, b, x, opts);
}

AffineProjection project_affine(const LegendreFunction& f, const Matrix& A, const Vector& b, const Vector& x,
                                const DualSolveOptions& opts) {
    opts.validate();
    require_interior(f, x, "project_affine");
    if (A.cols() != x.size() || A.rows() != b.size() || A.rows() == 0) {
        throw InvalidArgument("project_affine: inconsistent sizes");
    }
    const Eigen::Index m = A.rows();
    const double tol = opts.residual_tolerance;

    if ((A * x - b).cwiseAbs().maxCoeff() <= tol) return {x, Vector::Zero(m)};

    if (m == 1) {
        auto h = project_hyperplane(f, A.row(0).transpose(), b[0], x, opts);
        return {std::move(h.x), Vector::Constant(1, h.multiplier)};
    }

    const Vector y = f.grad(x);
    Vector lambda = Vector::Zero(m);
    Vector z = y;
    Vector primal = x;
    Vector grad = A * primal - b;
    double value = dual_value(f, A, b, y, lambda);
    double res = grad.cwiseAbs().maxCoeff();

    auto newton_step = [&](bool require_decrease) -> bool {
        const Matrix H = dual_hessian(f, A, z);
        Vector dir = newton_direction(H, grad);
        double slope = grad.dot(dir);
        if (!(slope < -1e-12 * grad.squaredNorm() * std::sqrt(H.diagonal().cwiseAbs().maxCoeff()))) {
            dir = -grad;
            slope = -grad.squaredNorm();
        }
        double t = 1.0;
        for (int ls = 0; ls < 200; ++ls, t *= opts.line_search_shrink) {
            const Vector lt = lambda + t * dir;
            const Vector zt = y + A.transpose() * lt;
            if (!f.in_conj_domain(zt)) continue;
            const double vt = f.conj_eval(zt) - lt.dot(b);
            const Vector pt = f.conj_grad(zt);
            const Vector gt = A * pt - b;
            const double rt = gt.cwiseAbs().maxCoeff();
            const bool armijo = vt <= value + 1e-4 * t * slope;
            const bool better = rt < res && vt <= value + 1e-12 * std::abs(value);
            if (require_decrease ? better : (armijo || better)) {
                lambda = lt;
                z = zt;
                primal = pt;
                grad = gt;
                value = vt;
                res = rt;
                return true;
            }
            if (require_decrease) return false;
        }
        return false;
    };

    // |A x - b| cannot be resolved below the rounding error of its evaluation.
    auto floor_of = [&](const Vector& p) {
        return 16.0 * 2.2e-16 * (b.cwiseAbs().maxCoeff() + (A.cwiseAbs() * p.cwiseAbs()).maxCoeff());
    };
    int iter = 0;
    while (res > std::max(tol, floor_of(primal))) {
        if (iter++ >= opts.max_newton_iterations) {
            throw ConvergenceError("affine projection: no convergence after " + std::to_string(opts.max_newton_iterations) +
                                   " Newton iterations (residual " + std::to_string(res) + ")");
        }
        if (!newton_step(false)) throw ConvergenceError("affine projection: line search step underflowed");
    }
    for (int polish = 0; polish < 2 && res > 0.0; ++polish) {
        if (!newton_step(true)) break;
    }
    return {primal, lambda};
}

Vector project_halfspace(const LegendreFunction& f, const Vector& a, double b, const Vector& x,
                         const DualSolveOptions& opts) {
    require_interior(f, x, "project_halfspace");
    if (a.size() != x.size()) throw InvalidArgument("project_halfspace: normal has the wrong dimension");
    if (kernels::dot(view(a), view(x)) <= b) return x;
    return project_hyperplane(f, a, b, x, opts).x;
}

Vector project(const LegendreFunction& f, const ConstraintSet& set, const Vector& x, const DualSolveOptions& opts) {
    return std::visit(
        [&](const auto& s) -> Vector {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Hyperplane>) {
                return project_hyperplane(f, s.a, s.b, x, opts).x;
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                return project_halfspace(f, s.a, s.b, x, opts);
            } else if constexpr (std::is_same_v<T, GeneralAffine>) {
                return project_affine(f, s.A, s.b, x, opts).x;
            } else {
                if (f.kind() == LegendreKind::boltzmann_shannon) {
                    require_interior(f, x, "project (marginal)");
                    return kl_project_marginal(view(x), s.shape, s.axis, s.target);
                }
                return project_affine(f, marginal_operator(s.shape, s.axis), s.target, x, opts).x;
            }
        },
        set.representation());
}

SetDistance distance_to_set(const LegendreFunction& f, const ConstraintSet& set, const Vector& x,
                            const DualSolveOptions& opts) {
    if (const auto* m = std::get_if<OtMarginal>(&set.representation());
        m != nullptr && f.kind() == LegendreKind::boltzmann_shannon) {
        // KL(P(pi), pi) = KL(target, marginal(pi)); no full-tensor divergence needed.
        require_interior(f, x, "distance_to_set (marginal)");
        const Vector current = marginal(view(x), m->shape, m->axis);
        double d = 0.0;
        for (Eigen::Index h = 0; h < current.size(); ++h) d += f.scalar_divergence(m->target[h], current[h]);
        return {d, kl_project_marginal(view(x), m->shape, m->axis, m->target)};
    }
    Vector p = project(f, set, x, opts);
    const double d = divergence(f, p, x);
    return {d, std::move(p)};
}

GeneralAffine stack_sets(const std::vector<ConstraintSet>& sets) {
    if (sets.empty()) throw InvalidArgument("stack_sets: empty family");
    const Eigen::Index n = sets.front().ambient_dim();
    Eigen::Index rows = 0;
    for (const auto& s : sets) {
        if (!s.is_affine()) throw InvalidArgument("stack_sets: halfspaces have no stacked affine representation");
        if (s.ambient_dim() != n) throw InvalidArgument("stack_sets: sets live in different dimensions");
        rows += s.rows();
    }
    GeneralAffine out{Matrix(rows, n), Vector(rows)};
    Eigen::Index r = 0;
    for (const auto& s : sets) {
        const Eigen::Index k = s.rows();
        out.A.middleRows(r, k) = s.dense_operator();
        out.b.segment(r, k) = s.rhs();
        r += k;
    }
    return out;
}

} // namespace bregproj
