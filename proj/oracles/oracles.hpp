#pragma once

// Brute-force references for tests. Nothing here calls the production
// projection code; the only shared dependency is Eigen.

#include <vector>

#include <Eigen/Dense>

namespace bregproj::oracles {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Pseudo-inverse by SVD with the max(m, n) * sigma_max * eps cutoff.
Matrix pinv(const Matrix& A);

/// x - B^{-1} A^T (A B^{-1} A^T)^+ (A x - b).
Vector quadratic_projection_oracle(const Matrix& B, const Matrix& A, const Vector& b, const Vector& x);

/// min over an angular grid of the unit sphere of span(basis) of
/// max_i ||Q_i v||^2. dim(span) <= 3; resolution points per angle.
double sphere_grid_minmax(const std::vector<Matrix>& Q, const Matrix& basis, int resolution);

struct SinkhornRun {
    Matrix plan;
    std::vector<Matrix> iterates; // kernel, then after every half-step
    int half_steps = 0;
};

/// Classical matrix scaling: alternately rescale rows to r and columns to c
/// starting with `first_axis`, until both marginal residuals are <= tol.
SinkhornRun reference_sinkhorn(const Matrix& kernel, const Vector& r, const Vector& c, double tol, int first_axis = 0,
                               bool keep_iterates = false, long max_half_steps = 1000000);

/// argmin sum_j x_j log x_j - x_j s.t. A x = b, by Newton on the dual
/// lambda -> sum_j exp((A^T lambda)_j) - <lambda, b>.
Vector constrained_entropy_oracle(const Matrix& A, const Vector& b, double tol);

/// Stable generalized KL divergence sum x log(x/y) - x + y.
double kl(const Vector& x, const Vector& y);

} // namespace bregproj::oracles
