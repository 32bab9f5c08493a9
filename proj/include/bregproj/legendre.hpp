#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "bregproj/common.hpp"

namespace bregproj {

enum class LegendreKind {
    boltzmann_shannon, // t log t - t
    burg,              // -log t
    fermi_dirac,       // t log t + (1-t) log(1-t)
    hellinger,         // -sqrt(1 - t^2)
    power,             // (t^b - b t + b - 1) / (b (b - 1)),  0 < b < 1
    tsallis,           // (t^q - t) / (q - 1),               0 < q < 1
    p_norm,            // |t|^p / p,                          1 < p <= 2
    quadratic,         // <Bx, x> / 2
};

std::string_view to_string(LegendreKind kind);
LegendreKind legendre_kind_from_string(std::string_view name);

/// A Legendre function phi on R^n together with its convex conjugate.
///
/// Every kind except `quadratic` is separable, phi(x) = sum_j varphi(x_j),
/// and is described by its kind, one scalar parameter and the dimension.
/// The quadratic kind keeps B and a Cholesky factor computed once at
/// construction. Instances are immutable.
class LegendreFunction {
public:
    static LegendreFunction boltzmann_shannon(Eigen::Index n);
    static LegendreFunction burg(Eigen::Index n);
    static LegendreFunction fermi_dirac(Eigen::Index n);
    static LegendreFunction hellinger(Eigen::Index n);
    static LegendreFunction power(Eigen::Index n, double beta);
    static LegendreFunction tsallis(Eigen::Index n, double q);
    static LegendreFunction p_norm(Eigen::Index n, double p);
    static LegendreFunction quadratic(const Matrix& B);
    static LegendreFunction identity_quadratic(Eigen::Index n);

    /// Same kind and parameters on a different dimension. Not available for
    /// the quadratic kind.
    [[nodiscard]] LegendreFunction with_dim(Eigen::Index n) const;

    [[nodiscard]] LegendreKind kind() const noexcept { return kind_; }
    [[nodiscard]] Eigen::Index dim() const noexcept { return dim_; }
    [[nodiscard]] double param() const noexcept { return param_; }
    [[nodiscard]] bool separable() const noexcept { return kind_ != LegendreKind::quadratic; }
    [[nodiscard]] const Matrix& quadratic_form() const { return B_; }

    // Domain predicates. "interior" checks are strict with no tolerance.
    [[nodiscard]] bool in_domain(const Vector& x) const;
    [[nodiscard]] bool in_interior(const Vector& x) const;
    [[nodiscard]] bool in_conj_domain(const Vector& y) const;

    /// phi(x); +inf outside dom(phi). Uses 0 log 0 = 0.
    [[nodiscard]] double eval(const Vector& x) const;
    /// grad phi(x); throws DomainError unless x is in int(dom phi).
    [[nodiscard]] Vector grad(const Vector& x) const;
    /// phi*(y); +inf outside dom(phi*).
    [[nodiscard]] double conj_eval(const Vector& y) const;
    /// grad phi*(y) = (grad phi)^{-1}(y); throws DomainError outside dom(phi*).
    [[nodiscard]] Vector conj_grad(const Vector& y) const;
    /// Diagonal of the Hessian of phi* for separable kinds.
    [[nodiscard]] Vector conj_hess_diag(const Vector& y) const;
    /// Hessian of phi* as a dense matrix (B^{-1} for the quadratic kind).
    [[nodiscard]] Matrix conj_hess(const Vector& y) const;

    // Scalar pieces of a separable kind; exposed for the 1-D projection path.
    [[nodiscard]] double scalar_eval(double t) const;
    [[nodiscard]] double scalar_grad(double t) const;
    [[nodiscard]] double scalar_conj_eval(double s) const;
    [[nodiscard]] double scalar_conj_grad(double s) const;
    [[nodiscard]] double scalar_conj_hess(double s) const;
    [[nodiscard]] bool scalar_in_interior(double t) const;
    [[nodiscard]] bool scalar_in_conj_domain(double s) const;
    /// Scalar Bregman divergence varphi(s) - varphi(t) - (s - t) varphi'(t),
    /// evaluated without cancellation where a closed form allows it.
    [[nodiscard]] double scalar_divergence(double s, double t) const;

    /// Upper end of dom(varphi*) for the separable kinds; +inf if unbounded.
    [[nodiscard]] double conj_domain_upper() const;

private:
    LegendreFunction(LegendreKind kind, Eigen::Index n, double param);

    void require_dim(Eigen::Index n) const;

    LegendreKind kind_;
    Eigen::Index dim_;
    double param_ = 0.0;
    Matrix B_;
    Eigen::LLT<Matrix> chol_;
};

/// Moves every coordinate of x into int(dom phi), using `floor` as the
/// minimum distance to a finite domain boundary. Separable kinds only.
Vector clamp_to_interior(const LegendreFunction& f, const Vector& x, double floor = 1e-300);

/// A point x0 with grad phi(x0) = 0, or nullopt if no such point exists
/// (Burg entropy).
std::optional<Vector> gradient_zero_point(const LegendreFunction& f);

} // namespace bregproj
