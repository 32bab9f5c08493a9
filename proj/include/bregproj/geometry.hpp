#pragma once

#include <variant>
#include <vector>

#include "bregproj/common.hpp"
#include "bregproj/legendre.hpp"
#include "bregproj/tensor.hpp"

namespace bregproj {

struct DualSolveOptions {
    double residual_tolerance = 1e-10; // on ||Ax - b||_inf
    int max_newton_iterations = 100;
    double line_search_shrink = 0.5;

    void validate() const;
};

/// {x : <a, x> = b}
struct Hyperplane {
    Vector a;
    double b = 0.0;
};

/// {x : A x = b}
struct GeneralAffine {
    Matrix A;
    Vector b;
};

/// {pi : marginal(pi, axis) = target} on a flattened tensor.
struct OtMarginal {
    TensorShape shape;
    std::size_t axis = 0;
    Vector target;
};

/// {x : <a, x> <= b}
struct Halfspace {
    Vector a;
    double b = 0.0;
};

/// One member C_i of the feasibility family.
class ConstraintSet {
public:
    using Representation = std::variant<Hyperplane, GeneralAffine, OtMarginal, Halfspace>;

    ConstraintSet(Hyperplane h, int label = 0);
    ConstraintSet(GeneralAffine g, int label = 0);
    ConstraintSet(OtMarginal m, int label = 0);
    ConstraintSet(Halfspace h, int label = 0);

    [[nodiscard]] const Representation& representation() const noexcept { return rep_; }
    [[nodiscard]] int label() const noexcept { return label_; }
    [[nodiscard]] bool is_affine() const noexcept { return !std::holds_alternative<Halfspace>(rep_); }
    [[nodiscard]] Eigen::Index ambient_dim() const;
    [[nodiscard]] Eigen::Index rows() const;

    /// Dense (A_i, b_i). For a halfspace this is the boundary hyperplane.
    [[nodiscard]] Matrix dense_operator() const;
    [[nodiscard]] Vector rhs() const;

    /// ||A_i x - b_i||_inf for affine sets; max(0, <a,x> - b) for halfspaces.
    [[nodiscard]] double residual(const Vector& x) const;

private:
    void validate() const;

    Representation rep_;
    int label_ = 0;
};

struct HyperplaneProjection {
    Vector x;
    double multiplier = 0.0;
};

struct AffineProjection {
    Vector x;
    Vector multiplier;
};

struct SetDistance {
    double distance = 0.0;
    Vector projection;
};

/// D_phi(x, y) = phi(x) - phi(y) - <x - y, grad phi(y)>; +inf when x is not
/// in dom(phi) or y is not in int(dom phi).
double divergence(const LegendreFunction& f, const Vector& x, const Vector& y);

/// D_{phi*}(u, v) computed from the conjugate.
double conj_divergence(const LegendreFunction& f, const Vector& u, const Vector& v);

/// Psi(lambda) = phi*(grad phi(x) + A^T lambda) - phi*(grad phi(x)) - <lambda, b>.
double dual_objective(const LegendreFunction& f, const Matrix& A, const Vector& b, const Vector& x,
                      const Vector& lambda);

/// A grad phi*(grad phi(x) + A^T lambda) - b.
Vector dual_gradient(const LegendreFunction& f, const Matrix& A, const Vector& b, const Vector& x,
                     const Vector& lambda);

HyperplaneProjection project_hyperplane(const LegendreFunction& f, const Vector& a, double b, const Vector& x,
                                        const DualSolveOptions& opts = {});

AffineProjection project_affine(const LegendreFunction& f, const Matrix& A, const Vector& b, const Vector& x,
                                const DualSolveOptions& opts = {});

Vector project_halfspace(const LegendreFunction& f, const Vector& a, double b, const Vector& x,
                         const DualSolveOptions& opts = {});

/// Bregman projection of x onto any supported set.
Vector project(const LegendreFunction& f, const ConstraintSet& set, const Vector& x, const DualSolveOptions& opts = {});

/// D_C(x) = D_phi(P_C(x), x) together with P_C(x).
SetDistance distance_to_set(const LegendreFunction& f, const ConstraintSet& set, const Vector& x,
                            const DualSolveOptions& opts = {});

/// Stacks the affine members of a family into a single (A, b).
GeneralAffine stack_sets(const std::vector<ConstraintSet>& sets);

} // namespace bregproj
