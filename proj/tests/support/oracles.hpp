#pragma once

// Independent reference computations used by the tests. None of these call the
// library's backward recursions.

#include "ralq/lqg.hpp"
#include "ralq/model.hpp"

#include <functional>
#include <vector>

namespace oracle {

using ralq::Matrix;
using ralq::Vector;

/// Closed-loop functionals obtained by propagating mean and covariance forward.
struct ForwardFunctionals {
    double J = 0.0;   ///< E[Σ_{t=0}^N x'Qx + Σ_{t=0}^{N-1} u'Ru]
    double J_R = 0.0; ///< E Σ_{t=1}^N (4 x̂'QWQx̂ + 2 x̂'m3)
};

/// Fully observed affine policy u_t = K[t] x_t + l[t] under i.i.d. noise with the given moments.
ForwardFunctionals forward_lqr(const ralq::LinearSystem& sys, const ralq::CostSpec& cost,
                               const ralq::QWeightedMoments& mom, const std::vector<Matrix>& K,
                               const std::vector<Vector>& l, const Vector& x0);

/// Filtered policy u_t = K[t] x̂_{t|t} + l[t] with Gaussian noise and the given Kalman schedule.
ForwardFunctionals forward_lqg(const ralq::LinearSystem& sys, const ralq::CostSpec& cost,
                               const ralq::lqg::KalmanSchedule& kalman, const std::vector<Matrix>& K,
                               const std::vector<Vector>& l, const Vector& wbar, const Vector& x0);

/// Scalar two-stage problem x_{t+1} = a x_t + b u_t + w_{t+1}, w discrete.
struct ScalarTwoStage {
    double a, b, q, r, x0, mu, eps;
    std::vector<double> atoms, probs;
};

/// Lagrangian J + μ(E Σ Δ_t² - ε) of the policy u_0 = c0, u_1 = k1 x_1 + l1, by exact enumeration.
double scalar_lagrangian(const ScalarTwoStage& p, double c0, double k1, double l1);

/// Minimum of scalar_lagrangian over (c0, k1, l1) by Nelder–Mead with restarts.
double scalar_lagrangian_min(const ScalarTwoStage& p);

/// Nelder–Mead (GSL nmsimplex2) from x0 with initial step sizes `step`.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x0, double step, double size_tol, int max_iter);

/// W_{t+1} = A W_t A' + W from W_0 = 0, t = 0..N.
std::vector<Matrix> lyapunov_iteration(const Matrix& A, const Matrix& W, int N);

/// Scalar exponential-cost recursion completes over N steps (1 - θ W V > 0 at every stage).
bool scalar_leqg_completes(double a, double b, double q, double r, double w, double theta, int N);

/// Lag-1 sample autocorrelation.
double lag1_autocorrelation(const std::vector<double>& xs);

} // namespace oracle
