#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bregproj/geometry.hpp"
#include "bregproj/legendre.hpp"

namespace bregproj {

/// H = [Hess phi*(grad phi(x))]^{1/2}.
Matrix hessian_root(const LegendreFunction& f, const Vector& x);

/// Orthogonal projector onto range(H A_i^T), formed as
/// H A_i^T (A_i H^2 A_i^T)^+ A_i H. Zero when H A_i^T vanishes.
Matrix projector_Q(const LegendreFunction& f, const Matrix& A_i, const Vector& x_star);

/// Smallest nonzero eigenvalue of sum_i mu_i Q_i(x_star).
double gamma_random(const LegendreFunction& f, const std::vector<ConstraintSet>& sets, const std::vector<double>& mu,
                    const Vector& x_star);

struct GreedyGammaOptions {
    int starts = 32;
    int steps = 500;            // projected-gradient steps per smoothing stage
    double gradient_tol = 1e-8; // max-norm of the Riemannian gradient
    std::uint64_t seed = 0x5eed;
};

struct GreedyGamma {
    double lower = 0.0;    // certified: gamma_random with uniform weights
    double estimate = 0.0; // max_i ||Q_i v||^2 at the best unit v found in V(x_star)
};

/// min over unit v in V(x_star) of max_i ||Q_i v||^2. Nonconvex: the
/// estimate is the objective at the best point of a multi-start search and
/// is therefore an upper bound; `lower` is a certified lower bound.
GreedyGamma gamma_greedy(const LegendreFunction& f, const std::vector<ConstraintSet>& sets, const Vector& x_star,
                         const GreedyGammaOptions& opts = {});

/// min over unit c in R^d of max_i c^T M_i c for symmetric PSD M_i, by the
/// same multi-start search gamma_greedy uses.
double sphere_minmax(const std::vector<Matrix>& M, const GreedyGammaOptions& opts = {});

struct KaczmarzRates {
    double sigma_greedy = 0.0;
    double sigma_random = 0.0;
    Matrix normalized; // rows H a_i / ||H a_i||
};

/// Local rates of the row-action (Bregman-Kaczmarz) method with uniform
/// sampling: 1 - min_{v in range(Abar^T)} ||Abar v||_inf^2 / ||v||^2 and
/// 1 - lambda_min^+(Abar^T Abar) / m.
KaczmarzRates kaczmarz_rates(const LegendreFunction& f, const Matrix& A, const Vector& x_star,
                             const GreedyGammaOptions& opts = {});

struct H2Check {
    bool holds = false;
    double sup_norm = 0.0; // max_i ||A_i^T (A_i Hess A_i^T)^+ A_i||
};

H2Check check_H2(const LegendreFunction& f, const std::vector<ConstraintSet>& sets, const Vector& x_star);

/// E = sum_i mu_i S_i (S_i^T A A^T S_i)^+ S_i^T for sketches S_i (m x tau_i).
Matrix averaged_sketch_projector(const Matrix& A, const std::vector<Matrix>& sketches, const std::vector<double>& mu);

/// range(A) ∩ Ker(E) = {0}, by a rank test on stacked bases.
bool check_exactness(const Matrix& A, const Matrix& E);

struct RateReport {
    double gamma_greedy_lower = 0.0;
    double gamma_greedy = 0.0;
    double gamma_random = 0.0;
    double local_greedy_rate = 0.0;
    double local_random_rate = 0.0;
    double h2_sup_norm = 0.0;
    bool h2_holds = false;
    std::optional<bool> exactness;
    std::optional<KaczmarzRates> kaczmarz;
    std::vector<std::string> notes;
};

RateReport rate_report(const LegendreFunction& f, const std::vector<ConstraintSet>& sets, const std::vector<double>& mu,
                       const Vector& x_star, const GreedyGammaOptions& opts = {});

} // namespace bregproj
