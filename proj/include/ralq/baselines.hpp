#pragma once

#include "ralq/lqr.hpp"

#include <optional>
#include <vector>

namespace ralq::baselines {

/// Information pattern for the exponential-of-quadratic controller.
/// Without S the state is measured exactly; with S the output y = Cx + v, v ~ N(0, S)
/// is filtered by the risk-sensitive (non-delayed) estimator.
struct LeqgMode {
    std::optional<Matrix> S;

    static LeqgMode fully_observed() { return {}; }
    static LeqgMode gaussian_output(Matrix S) { return {std::move(S)}; }
    bool partially_observed() const { return S.has_value(); }
};

/// Risk-sensitive gains for exponent θ > 0. Control law u_t = K[t] x_t + l[t] when fully observed,
/// u_t = K[t] (I - θ P̃_t (V[t] - Q))⁻¹ x̌_{t|t} + l[t] with the risk-sensitive estimate otherwise.
struct LeqgGains {
    double theta = 0.0;
    std::vector<Matrix> V;  ///< t = 0..N, V[N] = Q
    std::vector<Matrix> K;  ///< t = 0..N-1
    std::vector<Vector> xi; ///< t = 0..N
    std::vector<Vector> l;  ///< t = 0..N-1
    int valid_up_to = -1;   ///< stage where the recursion broke down, -1 if it completed
    LeqgMode mode;
    // Partially observed only: prior and posterior estimator covariances, t = 0..N.
    std::vector<Matrix> P;
    std::vector<Matrix> Ptilde;
    // Partially observed only: (I - θ P̃_t (V[t] - Q))⁻¹, t = 0..N-1.
    std::vector<Matrix> coupling;

    int horizon() const { return static_cast<int>(K.size()); }
    bool completed() const { return valid_up_to < 0; }
};

/// Backward recursion; on loss of well-posedness returns the partial result with valid_up_to set.
LeqgGains try_synthesize_leqg(const LinearSystem& system, const CostSpec& cost, const Matrix& W, const Vector& wbar,
                              double theta, LeqgMode mode = {});

/// As try_synthesize_leqg, but throws BreakdownError carrying the failing stage.
LeqgGains synthesize_leqg(const LinearSystem& system, const CostSpec& cost, const Matrix& W, const Vector& wbar,
                          double theta, LeqgMode mode = {});

struct BreakdownSearch {
    double theta = 0.0;      ///< largest θ (within tol) at which synthesis completes
    bool reached_cap = false; ///< no breakdown found up to the cap
    int evaluations = 0;
};

/// Bisection on θ for the breakdown point of the horizon-N recursion.
BreakdownSearch find_breakdown_theta(const LinearSystem& system, const CostSpec& cost, const Matrix& W,
                                     double tol = 1e-6, LeqgMode mode = {}, double cap = 1e3);

/// Risk-neutral comparison controller (μ = 0).
lqr::GainSchedule risk_neutral(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments);

} // namespace ralq::baselines
