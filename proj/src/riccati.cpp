#include "ralq/riccati.hpp"

#include "ralq/error.hpp"

#include <cmath>
#include <string>

namespace ralq {

Matrix riccati_gain(const Matrix& V, const Matrix& A, const Matrix& B, const Matrix& R, int stage) {
    const Matrix BtV = B.transpose() * V;
    const Matrix M = symmetrize(BtV * B + R);
    return -guarded_solve(M, BtV * A, stage, "B'VB + R");
}

RiccatiStepResult rde_step(const Matrix& V_next, const Matrix& A, const Matrix& B, const Matrix& Q_stage,
                           const Matrix& R, int stage) {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || V_next.rows() != n || V_next.cols() != n || Q_stage.rows() != n ||
        Q_stage.cols() != n || R.rows() != B.cols() || R.cols() != B.cols())
        structural_error("rde_step: inconsistent dimensions");
    RiccatiStepResult out;
    out.K = riccati_gain(V_next, A, B, R, stage);
    // A'V⁺A - A'V⁺B(B'V⁺B+R)⁻¹B'V⁺A = A'V⁺A + A'V⁺B K
    const Matrix AtV = A.transpose() * V_next;
    out.V = symmetrize(AtV * A + Q_stage + AtV * B * out.K);
    return out;
}

DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q_stage, const Matrix& R,
                        DareOptions options) {
    Matrix V = symmetrize(Q_stage);
    double last = 0.0;
    for (long k = 1; k <= options.max_iters; ++k) {
        Matrix next = rde_step(V, A, B, Q_stage, R, -1).V;
        last = spectral_norm(next - V) / (1.0 + spectral_norm(V));
        if (!next.allFinite() || !std::isfinite(last))
            throw DivergenceError("DARE iteration diverged at iteration " + std::to_string(k) +
                                  " (pair may not be stabilizable)",
                                  static_cast<int>(k));
        V = std::move(next);
        if (last <= options.tol) {
            DareSolution sol;
            sol.K = riccati_gain(V, A, B, R);
            const Matrix mapped = rde_step(V, A, B, Q_stage, R).V;
            sol.residual = spectral_norm(V - mapped) / (1.0 + spectral_norm(V));
            sol.V = std::move(V);
            sol.rho = spectral_radius(A + B * sol.K);
            sol.iters = k;
            return sol;
        }
    }
    throw NonConvergenceError("DARE iteration did not converge within " + std::to_string(options.max_iters) +
                                  " iterations (last relative step " + std::to_string(last) + ")",
                              last);
}

double riccati_difference_identity(std::span<const Matrix> V, std::span<const Matrix> Vbar,
                                   std::span<const Matrix> K, std::span<const Matrix> L,
                                   std::span<const Matrix> Q, std::span<const Matrix> Qbar, const Matrix& A,
                                   const Matrix& B) {
    const std::size_t N = K.size();
    if (V.size() != N + 1 || Vbar.size() != N + 1 || L.size() != N || Q.size() != N || Qbar.size() != N)
        structural_error("riccati_difference_identity: sequence lengths must be N+1 (V) and N (gains, penalties)");
    double worst = 0.0;
    for (std::size_t t = 0; t < N; ++t) {
        const Matrix lhs = V[t] - Vbar[t];
        const Matrix rhs =
            (A + B * L[t]).transpose() * (V[t + 1] - Vbar[t + 1]) * (A + B * K[t]) + Q[t] - Qbar[t];
        worst = std::max(worst, spectral_norm(lhs - rhs));
    }
    return worst;
}

} // namespace ralq
