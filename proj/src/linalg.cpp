#include "ralq/linalg.hpp"

#include "ralq/error.hpp"

#include <cmath>
#include <limits>

namespace ralq {

std::string_view to_string(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::Structural: return "structural";
    case ErrorCategory::Configuration: return "configuration";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Assumption: return "assumption";
    case ErrorCategory::Singularity: return "singularity";
    case ErrorCategory::NonConvergence: return "non_convergence";
    case ErrorCategory::Infeasible: return "infeasible";
    case ErrorCategory::Divergence: return "divergence";
    case ErrorCategory::Breakdown: return "breakdown";
    case ErrorCategory::Unsupported: return "unsupported";
    }
    return "unknown";
}

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

double spectral_radius(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> solver(M, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    if (M.cols() == 1 || M.rows() == 1) return M.norm();
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

double min_eigenvalue(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(symmetric), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(symmetric), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().maxCoeff();
}

double condition_number(const Matrix& M) {
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

bool is_symmetric(const Matrix& M, double tol) {
    if (M.rows() != M.cols()) return false;
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, M.cwiseAbs().maxCoeff());
}

bool is_psd(const Matrix& M, double sym_tol, double eig_tol) {
    if (M.rows() != M.cols()) return false;
    if (M.size() == 0) return true;
    if (!is_symmetric(M, sym_tol)) return false;
    return min_eigenvalue(M) >= -eig_tol;
}

bool psd_geq(const Matrix& A, const Matrix& B, double tol) {
    return min_eigenvalue(A - B) >= -tol;
}

Matrix guarded_solve(const Matrix& M, const Matrix& rhs, int stage, const std::string& what) {
    const double cond = condition_number(M);
    if (!(cond <= kMaxCondition)) {
        std::string msg = what + " is singular or ill-conditioned (cond=" + std::to_string(cond) + ")";
        if (stage >= 0) msg += " at stage " + std::to_string(stage);
        throw SingularityError(msg, stage);
    }
    return M.partialPivLu().solve(rhs);
}

Matrix psd_sqrt(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(M));
    Vector ev = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().transpose();
}

Matrix from_row_major(std::span<const double> values, int rows, int cols) {
    if (static_cast<long>(values.size()) != static_cast<long>(rows) * cols) {
        structural_error("expected " + std::to_string(rows * cols) + " entries, got " +
                         std::to_string(values.size()));
    }
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    return M;
}

bool all_finite(const Matrix& M) { return M.allFinite(); }

} // namespace ralq
