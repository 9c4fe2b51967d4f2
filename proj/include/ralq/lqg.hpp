#pragma once

#include "ralq/model.hpp"
#include "ralq/riccati.hpp"

#include <optional>
#include <vector>

namespace ralq::lqg {

/// Kalman prediction-error covariances and gains.
///
/// Wt[t] = Cov(x_t - x̂_t) for t = 0..N, Lt[t] = Wt[t] C'(C Wt[t] C' + S)⁻¹.
struct KalmanSchedule {
    std::vector<Matrix> Wt;
    std::vector<Matrix> Lt;
    Matrix Winf;
    Matrix Linf;
    Matrix W; ///< process noise covariance
    Matrix S; ///< measurement noise covariance
    double filter_rho = 0.0; ///< ρ(A(I - L∞C)), the steady prediction-error dynamics

    int horizon() const { return static_cast<int>(Wt.size()) - 1; }

    /// Covariance of the filter correction e_t = x̂_{t|t} - x̂_t.
    Matrix correction_covariance(int t, const Matrix& C) const;
};

/// Forward covariance recursion from W0 (zero when omitted).
KalmanSchedule kalman_forward(const LinearSystem& system, const Matrix& W, const Matrix& S, int N,
                              const std::optional<Matrix>& W0 = std::nullopt, DareOptions options = {});

struct FilterEstimate {
    Vector xhat_pred; ///< x̂_t
    Vector xhat_post; ///< x̂_{t|t}
};

/// One predict/correct step for t >= 1:
///   x̂_t = A x̂_{t-1|t-1} + B u_{t-1} + w̄,   x̂_{t|t} = x̂_t + L_t (y_t - C x̂_t).
FilterEstimate filter_step(const LinearSystem& system, const KalmanSchedule& schedule, const Vector& wbar,
                           const Vector& xhat_prev_post, const Vector& u_prev, const Vector& y, int t);

/// Correction only, from a given prediction (used at t = 0 with x̂_0 = x0).
Vector filter_correct(const LinearSystem& system, const KalmanSchedule& schedule, const Vector& xhat_pred,
                      const Vector& y, int t);

/// Risk-aware LQG controller u_t = K[t] x̂_{t|t} + l[t], t = 0..N-1.
///
/// V[t] is the cost-to-go on x̂_{t+1}; V[N-1] = Qmut[N-1], xi[N-1] = 0, and
/// Qmut[t] = Q + 4μ Q Wt[t+1] Q penalizes x_{t+1}.
struct LqgGainSchedule {
    std::vector<Matrix> V;
    std::vector<Matrix> K;
    std::vector<Vector> xi;
    std::vector<Vector> l;
    std::vector<Matrix> Qmut;
    double mu = 0.0;

    int horizon() const { return static_cast<int>(K.size()); }
};

LqgGainSchedule synthesize(const LinearSystem& system, const CostSpec& cost, const KalmanSchedule& kalman,
                           double mu, const Vector& wbar);

/// Risk functional Σ_{t=1}^N 4 E{x̂_t' Q W_t Q x̂_t} of the closed loop (Gaussian noise, m3 = 0).
double evaluate_risk(const LinearSystem& system, const CostSpec& cost, const KalmanSchedule& kalman,
                     const LqgGainSchedule& schedule, const Vector& x0, const Vector& wbar);

/// Σ_{t=1}^N 2 Tr((Q W_t)²): the Gaussian fourth-moment offset between ε and ε̄.
double fourth_moment_offset(const CostSpec& cost, const KalmanSchedule& kalman);

struct DualValue {
    double D = 0.0;
    double J = 0.0;
    double J_R = 0.0;
};

DualValue dual_value(const LinearSystem& system, const CostSpec& cost, const KalmanSchedule& kalman,
                     const LqgGainSchedule& schedule, const Vector& x0, const Vector& wbar, double eps_bar);

struct ConvergenceDiagnostics {
    bool applicable = false;
    std::string reason;         ///< set when not applicable
    std::vector<int> t;         ///< time indices t0..N-1
    std::vector<double> V_error; ///< ‖V_t - V‖₂
    std::vector<double> W_error; ///< ‖W_{t+1} - W∞‖₂ (the covariance entering V_t's penalty)
    std::vector<double> closed_loop_power; ///< ‖Ā^{N-t-1}‖₂
    double C1 = 0.0;            ///< ‖V‖^{3/2} σ_min(Q)^{-1/2}
    double C2 = 0.0;            ///< 4μ‖Q‖² (‖V‖/σ_min(Q))^{1/2} Σ_k ‖Ā^k‖
    bool bound_satisfied = false;
    double fitted_C1 = 0.0;     ///< smallest envelope constants
    double fitted_C2 = 0.0;
    bool fitted_feasible = false;
    double steady_rho = 0.0;    ///< ρ(A + B K) of the steady gain
};

/// Runs the Kalman recursion from W = 0 at t0 < 0 and the controller recursion back from N,
/// then compares both against their steady states.
ConvergenceDiagnostics convergence_diagnostics(const LinearSystem& system, const CostSpec& cost, const Matrix& W,
                                               const Matrix& S, double mu, int t0, int N,
                                               const std::optional<Matrix>& W0 = std::nullopt);

/// Steady risk-aware LQG gain: DARE with Q + 4μ Q W∞ Q.
DareSolution steady_state(const LinearSystem& system, const CostSpec& cost, const KalmanSchedule& kalman,
                          double mu, DareOptions options = {});

} // namespace ralq::lqg
