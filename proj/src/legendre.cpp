#include "bregproj/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bregproj {
namespace {

// (1 + d) log(1 + d) - d, the scalar Kullback-Leibler term t * h((s - t) / t).
double kl_term(double d) {
    if (d == -1.0) return 1.0;
    if (std::abs(d) < 1e-3) {
        // sum_{k >= 2} (-1)^k d^k / (k (k - 1))
        double term = d * d;
        double acc = 0.0;
        for (int k = 2; k <= 9; ++k) {
            acc += term / (k * (k - 1.0));
            term *= -d;
        }
        return acc;
    }
    return (1.0 + d) * std::log1p(d) - d;
}

// d - log(1 + d), the scalar Itakura-Saito term.
double is_term(double d) {
    if (std::abs(d) < 1e-3) {
        double term = d * d;
        double acc = 0.0;
        for (int k = 2; k <= 9; ++k) {
            acc += term / k;
            term *= -d;
        }
        return acc;
    }
    return d - std::log1p(d);
}

double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

double logistic(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

double sign(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

std::string describe(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string_view to_string(LegendreKind kind) {
    switch (kind) {
    case LegendreKind::boltzmann_shannon: return "boltzmann_shannon";
    case LegendreKind::burg: return "burg";
    case LegendreKind::fermi_dirac: return "fermi_dirac";
    case LegendreKind::hellinger: return "hellinger";
    case LegendreKind::power: return "power";
    case LegendreKind::tsallis: return "tsallis";
    case LegendreKind::p_norm: return "p_norm";
    case LegendreKind::quadratic: return "quadratic";
    }
    return "unknown";
}

LegendreKind legendre_kind_from_string(std::string_view name) {
    for (auto k : {LegendreKind::boltzmann_shannon, LegendreKind::burg, LegendreKind::fermi_dirac,
                   LegendreKind::hellinger, LegendreKind::power, LegendreKind::tsallis, LegendreKind::p_norm,
                   LegendreKind::quadratic}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidArgument("unknown Legendre function kind '" + std::string(name) + "'");
}

LegendreFunction::LegendreFunction(LegendreKind kind, Eigen::Index n, double param)
    : kind_(kind), dim_(n), param_(param) {
    if (n < 1) throw InvalidArgument("Legendre function dimension must be positive");
}

LegendreFunction LegendreFunction::boltzmann_shannon(Eigen::Index n) {
    return {LegendreKind::boltzmann_shannon, n, 0.0};
}
LegendreFunction LegendreFunction::burg(Eigen::Index n) { return {LegendreKind::burg, n, 0.0}; }
LegendreFunction LegendreFunction::fermi_dirac(Eigen::Index n) { return {LegendreKind::fermi_dirac, n, 0.0}; }
LegendreFunction LegendreFunction::hellinger(Eigen::Index n) { return {LegendreKind::hellinger, n, 0.0}; }

LegendreFunction LegendreFunction::power(Eigen::Index n, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("power Legendre function needs 0 < beta < 1");
    return {LegendreKind::power, n, beta};
}

LegendreFunction LegendreFunction::tsallis(Eigen::Index n, double q) {
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("Tsallis entropy needs 0 < q < 1");
    return {LegendreKind::tsallis, n, q};
}

LegendreFunction LegendreFunction::p_norm(Eigen::Index n, double p) {
    if (!(p > 1.0 && p <= 2.0)) throw InvalidArgument("p-norm Legendre function needs 1 < p <= 2");
    return {LegendreKind::p_norm, n, p};
}

LegendreFunction LegendreFunction::quadratic(const Matrix& B) {
    if (B.rows() != B.cols() || B.rows() == 0) throw InvalidArgument("quadratic form must be square and nonempty");
    const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
    if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidArgument("quadratic form must be symmetric");
    }
    LegendreFunction f(LegendreKind::quadratic, B.rows(), 0.0);
    f.B_ = 0.5 * (B + B.transpose());
    f.chol_.compute(f.B_);
    if (f.chol_.info() != Eigen::Success) throw InvalidArgument("quadratic form must be positive definite");
    return f;
}

LegendreFunction LegendreFunction::identity_quadratic(Eigen::Index n) {
    return quadratic(Matrix::Identity(n, n));
}

LegendreFunction LegendreFunction::with_dim(Eigen::Index n) const {
    if (!separable()) throw InvalidArgument("with_dim is not defined for the quadratic kind");
    return {kind_, n, param_};
}

void LegendreFunction::require_dim(Eigen::Index n) const {
    if (n != dim_) {
        throw InvalidArgument("dimension mismatch: expected " + std::to_string(dim_) + ", got " + std::to_string(n));
    }
}

double LegendreFunction::conj_domain_upper() const {
    switch (kind_) {
    case LegendreKind::burg: return 0.0;
    case LegendreKind::power:
    case LegendreKind::tsallis: return 1.0 / (1.0 - param_);
    default: return kInfinity;
    }
}

bool LegendreFunction::scalar_in_interior(double t) const {
    if (!std::isfinite(t)) return false;
    switch (kind_) {
    case LegendreKind::boltzmann_shannon:
    case LegendreKind::burg:
    case LegendreKind::power:
    case LegendreKind::tsallis: return t > 0.0;
    case LegendreKind::fermi_dirac: return t > 0.0 && t < 1.0;
    case LegendreKind::hellinger: return t > -1.0 && t < 1.0;
    case LegendreKind::p_norm:
    case LegendreKind::quadratic: return true;
    }
    return false;
}

bool LegendreFunction::scalar_in_conj_domain(double s) const {
    return std::isfinite(s) && s < conj_domain_upper();
}

double LegendreFunction::scalar_eval(double t) const {
    const double b = param_;
    switch (kind_) {
    case LegendreKind::boltzmann_shannon:
        if (t == 0.0) return 0.0;
        return t > 0.0 ? t * std::log(t) - t : kInfinity;
    case LegendreKind::burg: return t > 0.0 ? -std::log(t) : kInfinity;
    case LegendreKind::fermi_dirac:
        if (t < 0.0 || t > 1.0) return kInfinity;
        return (t > 0.0 ? t * std::log(t) : 0.0) + (t < 1.0 ? (1.0 - t) * std::log1p(-t) : 0.0);
    case LegendreKind::hellinger:
        if (t < -1.0 || t > 1.0) return kInfinity;
        return -std::sqrt((1.0 - t) * (1.0 + t));
    case LegendreKind::power:
        if (t < 0.0) return kInfinity;
        return (std::pow(t, b) - b * t + b - 1.0) / (b * (b - 1.0));
    case LegendreKind::tsallis:
        if (t < 0.0) return kInfinity;
        return (std::pow(t, b) - t) / (b - 1.0);
    case LegendreKind::p_norm: return std::pow(std::abs(t), b) / b;
    case LegendreKind::quadratic: break;
    }
    throw InvalidArgument("scalar evaluation requested for a non-separable Legendre function");
}

double LegendreFunction::scalar_grad(double t) const {
    if (!scalar_in_interior(t)) {
        throw DomainError(std::string(to_string(kind_)) + ": gradient requested outside int(dom phi) at t=" + describe(t));
    }
    const double b = param_;
    switch (kind_) {
    case LegendreKind::boltzmann_shannon: return std::log(t);
    case LegendreKind::burg: return -1.0 / t;
    case LegendreKind::fermi_dirac: return std::log(t) - std::log1p(-t);
    case LegendreKind::hellinger: return t / std::sqrt((1.0 - t) * (1.0 + t));
    case LegendreKind::power: return (std::pow(t, b - 1.0) - 1.0) / (b - 1.0);
    case LegendreKind::tsallis: return (b * std::pow(t, b - 1.0) - 1.0) / (b - 1.0);
    case LegendreKind::p_norm: return sign(t) * std::pow(std::abs(t), b - 1.0);
    case LegendreKind::quadratic: break;
    }
    throw InvalidArgument("scalar gradient requested for a non-separable Legendre function");
}

double LegendreFunction::scalar_conj_eval(double s) const {
    if (!scalar_in_conj_domain(s)) return kInfinity;
    const double b = param_;
    switch (kind_) {
    case LegendreKind::boltzmann_shannon: return std::exp(s);
    case LegendreKind::burg: return -1.0 - std::log(-s);
    case LegendreKind::fermi_dirac: return softplus(s);
    case LegendreKind::hellinger: return std::hypot(1.0, s);
    case LegendreKind::power: {
        const double u = 1.0 - (1.0 - b) * s;
        return (std::pow(u, b / (b - 1.0)) - 1.0) / b;
    }
    case LegendreKind::tsallis: {
        const double w = (1.0 - (1.0 - b) * s) / b;
        return std::pow(w, b / (b - 1.0));
    }
    case LegendreKind::p_norm: {
        const double q = b / (b - 1.0);
        return std::pow(std::abs(s), q) / q;
    }
    case LegendreKind::quadratic: break;
    }
    throw InvalidArgument("scalar conjugate requested for a non-separable Legendre function");
}

double LegendreFunction::scalar_conj_grad(double s) const {
    if (!scalar_in_conj_domain(s)) {
        throw DomainError(std::string(to_string(kind_)) + ": conjugate gradient requested outside dom(phi*) at s=" +
                          describe(s));
    }
    const double b = param_;
    switch (kind_) {
    case LegendreKind::boltzmann_shannon: return std::exp(s);
    case LegendreKind::burg: return -1.0 / s;
    case LegendreKind::fermi_dirac: return logistic(s);
    case LegendreKind::hellinger: return s / std::hypot(1.0, s);
    case LegendreKind::power: return std::pow(1.0 - (1.0 - b) * s, 1.0 / (b - 1.0));
    case LegendreKind::tsallis: return std::pow((1.0 - (1.0 - b) * s) / b, 1.0 / (b - 1.0));
    case LegendreKind::p_norm: {
        const double q = b / (b - 1.0);
        return sign(s) * std::pow(std::abs(s), q - 1.0);
    }
    case LegendreKind::quadratic: break;
    }
    throw InvalidArgument("scalar conjugate gradient requested for a non-separable Legendre function");
}

double LegendreFunction::scalar_conj_hess(double s) const {
    if (!scalar_in_conj_domain(s)) {
        throw DomainError(std::string(to_string(kind_)) + ": conjugate Hessian requested outside dom(phi*) at s=" +
                          describe(s));
    }
    const double b = param_;
    switch (kind_) {
    case LegendreKind::boltzmann_shannon: return std::exp(s);
    case LegendreKind::burg: return 1.0 / (s * s);
    case LegendreKind::fermi_dirac: {
        const double sig = logistic(s);
        return sig * logistic(-s);
    }
    case LegendreKind::hellinger: {
        const double r = std::hypot(1.0, s);
        return 1.0 / (r * r * r);
    }
    case LegendreKind::power: return std::pow(1.0 - (1.0 - b) * s, (2.0 - b) / (b - 1.0));
    case LegendreKind::tsallis: return std::pow((1.0 - (1.0 - b) * s) / b, (2.0 - b) / (b - 1.0)) / b;
    case LegendreKind::p_norm: {
        const double q = b / (b - 1.0);
        if (q == 2.0) return 1.0;
        return (q - 1.0) * std::pow(std::abs(s), q - 2.0);
    }
    case LegendreKind::quadratic: break;
    }
    throw InvalidArgument("scalar conjugate Hessian requested for a non-separable Legendre function");
}

double LegendreFunction::scalar_divergence(double s, double t) const {
    if (!scalar_in_interior(t) || !std::isfinite(scalar_eval(s))) return kInfinity;
    switch (kind_) {
    case LegendreKind::boltzmann_shannon: return t * kl_term((s - t) / t);
    case LegendreKind::burg: return is_term((s - t) / t);
    case LegendreKind::fermi_dirac: return t * kl_term((s - t) / t) + (1.0 - t) * kl_term((t - s) / (1.0 - t));
    case LegendreKind::hellinger: {
        const double rs = std::sqrt((1.0 - s) * (1.0 + s));
        const double rt = std::sqrt((1.0 - t) * (1.0 + t));
        const double d = s - t;
        return d * d / ((1.0 - s * t + rs * rt) * rt);
    }
    default: break;
    }
    const double d = scalar_eval(s) - scalar_eval(t) - (s - t) * scalar_grad(t);
    return std::max(d, 0.0);
}

bool LegendreFunction::in_domain(const Vector& x) const {
    require_dim(x.size());
    if (!separable()) return x.allFinite();
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (!std::isfinite(scalar_eval(x[j]))) return false;
    }
    return true;
}

bool LegendreFunction::in_interior(const Vector& x) const {
    require_dim(x.size());
    if (!separable()) return x.allFinite();
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (!scalar_in_interior(x[j])) return false;
    }
    return true;
}

bool LegendreFunction::in_conj_domain(const Vector& y) const {
    require_dim(y.size());
    if (!separable()) return y.allFinite();
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        if (!scalar_in_conj_domain(y[j])) return false;
    }
    return true;
}

double LegendreFunction::eval(const Vector& x) const {
    require_dim(x.size());
    if (!separable()) return x.allFinite() ? 0.5 * x.dot(B_ * x) : kInfinity;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double v = scalar_eval(x[j]);
        if (!std::isfinite(v)) return kInfinity;
        acc += v;
    }
    return acc;
}

Vector LegendreFunction::grad(const Vector& x) const {
    require_dim(x.size());
    if (!separable()) {
        if (!x.allFinite()) throw DomainError("quadratic: gradient requested at a non-finite point");
        return B_ * x;
    }
    Vector g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) g[j] = scalar_grad(x[j]);
    return g;
}

double LegendreFunction::conj_eval(const Vector& y) const {
    require_dim(y.size());
    if (!separable()) return y.allFinite() ? 0.5 * y.dot(chol_.solve(y)) : kInfinity;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double v = scalar_conj_eval(y[j]);
        if (!std::isfinite(v)) return kInfinity;
        acc += v;
    }
    return acc;
}

Vector LegendreFunction::conj_grad(const Vector& y) const {
    require_dim(y.size());
    if (!separable()) {
        if (!y.allFinite()) throw DomainError("quadratic: conjugate gradient requested at a non-finite point");
        return chol_.solve(y);
    }
    Vector g(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) g[j] = scalar_conj_grad(y[j]);
    return g;
}

Vector LegendreFunction::conj_hess_diag(const Vector& y) const {
    require_dim(y.size());
    if (!separable()) throw InvalidArgument("conj_hess_diag is defined for separable kinds only");
    Vector h(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) h[j] = scalar_conj_hess(y[j]);
    return h;
}

Matrix LegendreFunction::conj_hess(const Vector& y) const {
    require_dim(y.size());
    if (!separable()) {
        if (!y.allFinite()) throw DomainError("quadratic: conjugate Hessian requested at a non-finite point");
        return chol_.solve(Matrix::Identity(dim_, dim_));
    }
    return conj_hess_diag(y).asDiagonal();
}

Vector clamp_to_interior(const LegendreFunction& f, const Vector& x, double floor) {
    if (!f.separable()) return x;
    const double upper_gap = std::max(floor, 1.2e-16);
    Vector out = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double& t = out[j];
        switch (f.kind()) {
        case LegendreKind::boltzmann_shannon:
        case LegendreKind::burg:
        case LegendreKind::power:
        case LegendreKind::tsallis: t = std::max(t, floor); break;
        case LegendreKind::fermi_dirac: t = std::clamp(t, floor, 1.0 - upper_gap); break;
        case LegendreKind::hellinger: t = std::clamp(t, -1.0 + upper_gap, 1.0 - upper_gap); break;
        default: break;
        }
    }
    return out;
}

std::optional<Vector> gradient_zero_point(const LegendreFunction& f) {
    const Eigen::Index n = f.dim();
    switch (f.kind()) {
    case LegendreKind::boltzmann_shannon:
    case LegendreKind::power: return Vector::Ones(n);
    case LegendreKind::burg: return std::nullopt;
    case LegendreKind::fermi_dirac: return Vector::Constant(n, 0.5);
    case LegendreKind::tsallis: return Vector::Constant(n, std::pow(f.param(), 1.0 / (1.0 - f.param())));
    case LegendreKind::hellinger:
    case LegendreKind::p_norm:
    case LegendreKind::quadratic: return Vector::Zero(n);
    }
    return std::nullopt;
}

} // namespace bregproj
