#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>

namespace ralq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative condition-number ceiling for every guarded solve in the library.
inline constexpr double kMaxCondition = 1e12;

Matrix symmetrize(const Matrix& M);

/// Largest |eigenvalue|.
double spectral_radius(const Matrix& M);

/// Largest singular value (matrix 2-norm); Euclidean norm for vectors.
double spectral_norm(const Matrix& M);

double min_eigenvalue(const Matrix& symmetric);

double max_eigenvalue(const Matrix& symmetric);

/// 2-norm condition number via singular values; +inf when singular.
double condition_number(const Matrix& M);

bool is_symmetric(const Matrix& M, double tol);

/// Symmetric within `sym_tol` and all eigenvalues >= -eig_tol.
bool is_psd(const Matrix& M, double sym_tol = 1e-12, double eig_tol = 1e-10);

/// A ⪰ B - tol*I.
bool psd_geq(const Matrix& A, const Matrix& B, double tol);

/// Solve M X = rhs for small dense M; throws SingularityError if cond(M) > kMaxCondition.
Matrix guarded_solve(const Matrix& M, const Matrix& rhs, int stage, const std::string& what);

/// Symmetric PSD square root via eigen-decomposition (negative eigenvalues clamped to 0).
Matrix psd_sqrt(const Matrix& M);

/// Build a rows×cols matrix from a row-major list.
Matrix from_row_major(std::span<const double> values, int rows, int cols);

/// Whether every entry is finite.
bool all_finite(const Matrix& M);

} // namespace ralq
