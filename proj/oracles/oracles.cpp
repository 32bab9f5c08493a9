#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bregproj::oracles {

Matrix pinv(const Matrix& A) {
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double tol = static_cast<double>(std::max(A.rows(), A.cols())) * (s.size() ? s[0] : 0.0) * 2.2e-16;
    Vector inv = Vector::Zero(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s[k] > tol) inv[k] = 1.0 / s[k];
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector quadratic_projection_oracle(const Matrix& B, const Matrix& A, const Vector& b, const Vector& x) {
    const Matrix Binv = B.inverse();
    return x - Binv * A.transpose() * pinv(A * Binv * A.transpose()) * (A * x - b);
}

double sphere_grid_minmax(const std::vector<Matrix>& Q, const Matrix& basis, int resolution) {
    const Eigen::Index d = basis.cols();
    if (d < 1 || d > 3) throw std::invalid_argument("sphere_grid_minmax supports subspaces of dimension 1..3");
    auto objective = [&](const Vector& c) {
        const Vector v = basis * c;
        double m = 0.0;
        for (const auto& q : Q) m = std::max(m, (q * v).squaredNorm() / v.squaredNorm());
        return m;
    };
    if (d == 1) return objective(Vector::Ones(1));
    double best = std::numeric_limits<double>::infinity();
    const double pi = std::numbers::pi;
    if (d == 2) {
        for (int k = 0; k < resolution; ++k) {
            const double t = pi * k / resolution;
            best = std::min(best, objective(Vector{{std::cos(t), std::sin(t)}}));
        }
        return best;
    }
    for (int i = 0; i <= resolution; ++i) {
        const double theta = pi * i / resolution;
        for (int k = 0; k < 2 * resolution; ++k) {
            const double ph = pi * k / resolution;
            best = std::min(best, objective(Vector{{std::sin(theta) * std::cos(ph), std::sin(theta) * std::sin(ph),
                                                    std::cos(theta)}}));
        }
    }
    return best;
}

SinkhornRun reference_sinkhorn(const Matrix& kernel, const Vector& r, const Vector& c, double tol, int first_axis,
                               bool keep_iterates, long max_half_steps) {
    SinkhornRun run;
    Matrix P = kernel;
    if (keep_iterates) run.iterates.push_back(P);
    auto residual = [&] {
        return std::max((P.rowwise().sum() - r).cwiseAbs().maxCoeff(), (P.colwise().sum().transpose() - c).cwiseAbs().maxCoeff());
    };
    int axis = first_axis;
    while (residual() > tol) {
        if (run.half_steps >= max_half_steps) throw std::runtime_error("reference_sinkhorn: iteration cap reached");
        if (axis == 0) {
            const Vector rows = P.rowwise().sum();
            for (Eigen::Index i = 0; i < P.rows(); ++i) P.row(i) *= r[i] / rows[i];
        } else {
            const Vector cols = P.colwise().sum().transpose();
            for (Eigen::Index j = 0; j < P.cols(); ++j) P.col(j) *= c[j] / cols[j];
        }
        ++run.half_steps;
        if (keep_iterates) run.iterates.push_back(P);
        axis = 1 - axis;
    }
    run.plan = P;
    return run;
}

Vector constrained_entropy_oracle(const Matrix& A, const Vector& b, double tol) {
    const Eigen::Index m = A.rows();
    Vector lambda = Vector::Zero(m);
    auto primal = [&](const Vector& l) { return Vector((A.transpose() * l).array().exp()); };
    auto value = [&](const Vector& l) { return primal(l).sum() - l.dot(b); };
    for (int it = 0; it < 500; ++it) {
        const Vector x = primal(lambda);
        const Vector g = A * x - b;
        if (g.cwiseAbs().maxCoeff() <= tol) return x;
        const Matrix H = A * x.asDiagonal() * A.transpose();
        const Vector d = -pinv(H) * g;
        double t = 1.0;
        const double v0 = value(lambda);
        while (t > 1e-16 && value(lambda + t * d) > v0 + 1e-4 * t * g.dot(d)) t *= 0.5;
        if (t <= 1e-16) {
            // Roundoff floor of the objective; accept a full step if it reduces the residual.
            const Vector g1 = A * primal(lambda + d) - b;
            if (g1.cwiseAbs().maxCoeff() >= g.cwiseAbs().maxCoeff()) break;
            t = 1.0;
        }
        lambda += t * d;
    }
    const Vector x = primal(lambda);
    if ((A * x - b).cwiseAbs().maxCoeff() > tol) throw std::runtime_error("constrained_entropy_oracle: no convergence");
    return x;
}

double kl(const Vector& x, const Vector& y) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x[j] == 0.0) {
            acc += y[j];
            continue;
        }
        const double d = (x[j] - y[j]) / y[j];
        acc += y[j] * ((1.0 + d) * std::log1p(d) - d);
    }
    return acc;
}

} // namespace bregproj::oracles
