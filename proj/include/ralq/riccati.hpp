#pragma once

#include "ralq/linalg.hpp"

#include <span>

namespace ralq {

struct RiccatiStepResult {
    Matrix V; ///< cost-to-go at the earlier stage
    Matrix K; ///< feedback gain at the earlier stage
};

/// One backward Riccati step:
///   V = A'V⁺A + Q_stage - A'V⁺B (B'V⁺B + R)⁻¹ B'V⁺A,   K = -(B'V⁺B + R)⁻¹ B'V⁺A.
/// `stage` is only used to label singularity errors.
RiccatiStepResult rde_step(const Matrix& V_next, const Matrix& A, const Matrix& B, const Matrix& Q_stage,
                           const Matrix& R, int stage = -1);

/// Gain K = -(B'VB + R)⁻¹ B'VA for a given cost-to-go.
Matrix riccati_gain(const Matrix& V, const Matrix& A, const Matrix& B, const Matrix& R, int stage = -1);

struct DareOptions {
    double tol = 1e-12;
    long max_iters = 100'000;
};

struct DareSolution {
    Matrix V;
    Matrix K;
    double rho = 0.0;     ///< spectral radius of A + BK
    long iters = 0;
    double residual = 0.0; ///< ‖V - riccati_map(V)‖₂ / (1 + ‖V‖₂)
};

/// Stabilizing DARE solution by backward iteration from V = Q_stage.
DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q_stage, const Matrix& R,
                        DareOptions options = {});

/// Checks the difference identity between two Riccati trajectories
///   V_t - V̄_t = (A + B L_t)'(V_{t+1} - V̄_{t+1})(A + B K_t) + Q_t - Q̄_t,
/// where V[t] has t = 0..N, K[t]/L[t] are the gains computed from V[t+1]/V̄[t+1] and
/// Q[t]/Q̄[t] the stage penalties added to produce V[t]. Returns the max 2-norm residual.
double riccati_difference_identity(std::span<const Matrix> V, std::span<const Matrix> Vbar,
                                   std::span<const Matrix> K, std::span<const Matrix> L,
                                   std::span<const Matrix> Q, std::span<const Matrix> Qbar, const Matrix& A,
                                   const Matrix& B);

} // namespace ralq
