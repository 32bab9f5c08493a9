#include "bregproj/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace bregproj::linalg {

double rank_threshold(const Eigen::JacobiSVD<Matrix>& svd, Eigen::Index rows, Eigen::Index cols) {
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s[0] : 0.0;
    return static_cast<double>(std::max(rows, cols)) * smax * kRankEpsilon;
}

namespace {

Eigen::JacobiSVD<Matrix> full_svd(const Matrix& A) { return Eigen::JacobiSVD<Matrix>(A, Eigen::ComputeFullU | Eigen::ComputeFullV); }

Eigen::Index rank_of(const Eigen::JacobiSVD<Matrix>& svd, double tol) {
    const auto& s = svd.singularValues();
    Eigen::Index r = 0;
    while (r < s.size() && s[r] > tol) ++r;
    return r;
}

} // namespace

Matrix pseudo_inverse(const Matrix& A) {
    if (A.size() == 0) return Matrix::Zero(A.cols(), A.rows());
    const auto svd = full_svd(A);
    const double tol = rank_threshold(svd, A.rows(), A.cols());
    const Eigen::Index r = rank_of(svd, tol);
    Matrix out = Matrix::Zero(A.cols(), A.rows());
    for (Eigen::Index k = 0; k < r; ++k) {
        out.noalias() += svd.matrixV().col(k) * (1.0 / svd.singularValues()[k]) * svd.matrixU().col(k).transpose();
    }
    return out;
}

Eigen::Index numerical_rank(const Matrix& A) {
    if (A.size() == 0) return 0;
    const auto svd = full_svd(A);
    return rank_of(svd, rank_threshold(svd, A.rows(), A.cols()));
}

Matrix range_basis(const Matrix& A) {
    if (A.size() == 0) return Matrix::Zero(A.rows(), 0);
    const auto svd = full_svd(A);
    const Eigen::Index r = rank_of(svd, rank_threshold(svd, A.rows(), A.cols()));
    return svd.matrixU().leftCols(r);
}

Matrix kernel_basis(const Matrix& A) {
    if (A.rows() == 0) return Matrix::Identity(A.cols(), A.cols());
    const auto svd = full_svd(A);
    const Eigen::Index r = rank_of(svd, rank_threshold(svd, A.rows(), A.cols()));
    return svd.matrixV().rightCols(A.cols() - r);
}

Matrix sym_sqrt(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

double eigen_zero_threshold(const Eigen::VectorXd& eigenvalues, Eigen::Index n) {
    const double lmax = eigenvalues.size() > 0 ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    return static_cast<double>(n) * lmax * kRankEpsilon;
}

double smallest_nonzero_eigenvalue(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    const double tol = eigen_zero_threshold(ev, S.rows());
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev[k] > tol) return ev[k];
    }
    return 0.0;
}

double operator_norm(const Matrix& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(A);
    return svd.singularValues()[0];
}

} // namespace bregproj::linalg
