#pragma once

#include "bregproj/common.hpp"

namespace bregproj::linalg {

/// Singular values at or below max(rows, cols) * sigma_max * eps are zero.
double rank_threshold(const Eigen::JacobiSVD<Matrix>& svd, Eigen::Index rows, Eigen::Index cols);

Matrix pseudo_inverse(const Matrix& A);

Eigen::Index numerical_rank(const Matrix& A);

/// Orthonormal basis (columns) of range(A).
Matrix range_basis(const Matrix& A);

/// Orthonormal basis (columns) of Ker(A).
Matrix kernel_basis(const Matrix& A);

/// Symmetric PSD square root; negative eigenvalues (roundoff) are clamped at 0.
Matrix sym_sqrt(const Matrix& S);

/// Eigenvalues of a symmetric matrix at or below n * lambda_max * eps are zero.
double eigen_zero_threshold(const Eigen::VectorXd& eigenvalues, Eigen::Index n);

/// Smallest eigenvalue above the zero threshold; 0 if the matrix is numerically zero.
double smallest_nonzero_eigenvalue(const Matrix& S);

/// Spectral norm.
double operator_norm(const Matrix& A);

} // namespace bregproj::linalg
