#pragma once

#include "ralq/model.hpp"
#include "ralq/riccati.hpp"

#include <vector>

namespace ralq {

/// Inflated state penalty Q + 4μ·QWQ.
Matrix inflated_penalty(const Matrix& Q, const Matrix& W, double mu);

namespace lqr {

/// Time-indexed risk-aware LQR controller u_t = K[t] x_t + l[t].
///
/// Indexing: V, xi, c run over t = 0..N with V[N] = Q_μ, xi[N] = μ m3, c[N] = 0;
/// K[t], l[t] (t = 0..N-1) are computed from V[t+1], xi[t+1].
struct GainSchedule {
    std::vector<Matrix> V;
    std::vector<Matrix> K;
    std::vector<Vector> xi;
    std::vector<Vector> l;
    std::vector<double> c;
    double mu = 0.0;
    Matrix Qmu;

    int horizon() const { return static_cast<int>(K.size()); }
};

/// Backward pass of the five coupled recursions (V, K, ξ, l, c).
GainSchedule synthesize(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments,
                        double mu);

/// Diagnostic split ξ_t = S_t μ m3 + T_t w̄ of the affine term:
///   S_t = (A+BK_t)'S_{t+1} + I,  T_t = (A+BK_t)'(T_{t+1} + V_{t+1}),  S_N = I, T_N = 0.
struct AffineDecomposition {
    std::vector<Matrix> S;
    std::vector<Matrix> T;
};

AffineDecomposition affine_decomposition(const LinearSystem& system, const GainSchedule& schedule);

struct SteadyGains {
    Matrix V;
    Matrix K;
    Vector xi;
    Vector l;
    double rho = 0.0;
};

/// Infinite-horizon limit: DARE for Q_μ plus closed-form ξ and l.
SteadyGains steady_state(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments,
                         double mu, DareOptions options = {});

/// Closed-form risk functional J_R(u*(μ)) via the backward P, ζ, d recursions.
double evaluate_risk(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments,
                     const GainSchedule& schedule, const Vector& x0);

struct DualValue {
    double D = 0.0; ///< dual function D(μ) = L*_0(x0, μ) + g(μ)
    double J = 0.0; ///< LQ cost of u*(μ), from L = J + μ J_R - μ ε̄
    double J_R = 0.0;
};

DualValue dual_value(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments,
                     const GainSchedule& schedule, const Vector& x0, double eps_bar);

/// Tracking form of the Lagrangian stage cost:
///   (x + μM3)'Q(x + μM3) + x'(4μQWQ)x + u'Ru - μ² M3'QM3.
struct TrackingForm {
    Vector target;        ///< -μ M3
    Matrix extra_penalty; ///< 4μ QWQ
    double constant = 0.0; ///< -μ² M3'QM3
};

TrackingForm tracking_reformulation(const CostSpec& cost, const QWeightedMoments& moments, double mu);

/// Lagrangian stage cost x'Q_μ x + 2μ m3'x + u'Ru.
double lagrangian_stage_cost(const CostSpec& cost, const QWeightedMoments& moments, double mu, const Vector& x,
                             const Vector& u);

/// The same stage cost evaluated through a TrackingForm.
double tracking_stage_cost(const CostSpec& cost, const TrackingForm& form, const Vector& x, const Vector& u);

} // namespace lqr
} // namespace ralq
