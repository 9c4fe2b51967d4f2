#include "ralq/lqg.hpp"

#include "ralq/error.hpp"
#include "ralq/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ralq::lqg {

namespace {

Matrix innovation_covariance(const Matrix& Wt, const Matrix& C, const Matrix& S) {
    return symmetrize(C * Wt * C.transpose() + S);
}

void check_index(const KalmanSchedule& k, int t) {
    if (t < 0 || t > k.horizon())
        throw Error(ErrorCategory::Structural,
                    "filter index " + std::to_string(t) + " outside 0.." + std::to_string(k.horizon()));
}

// Smallest (c1, c2) >= 0, minimizing c1 Σa + c2 Σb, with c1 a_t + c2 b_t >= e_t.
// Two variables, so the optimum sits on a vertex: an axis point or a pair of tight rows.
bool envelope_fit(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& e,
                  double& c1, double& c2) {
    const std::size_t n = e.size();
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += a[i];
        sb += b[i];
    }
    auto feasible = [&](double x, double y) {
        if (x < 0.0 || y < 0.0 || !std::isfinite(x) || !std::isfinite(y)) return false;
        for (std::size_t i = 0; i < n; ++i)
            if (x * a[i] + y * b[i] < e[i] * (1.0 - 1e-12)) return false;
        return true;
    };
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](double x, double y) {
        if (!feasible(x, y)) return;
        const double obj = x * sa + y * sb;
        if (obj < best) {
            best = obj;
            c1 = x;
            c2 = y;
        }
    };
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i)
        if (e[i] > 0.0) active.push_back(i);
    if (active.empty()) {
        c1 = c2 = 0.0;
        return true;
    }
    double x_only = 0.0, y_only = 0.0;
    for (auto i : active) {
        x_only = std::max(x_only, a[i] > 0.0 ? e[i] / a[i] : std::numeric_limits<double>::infinity());
        y_only = std::max(y_only, b[i] > 0.0 ? e[i] / b[i] : std::numeric_limits<double>::infinity());
    }
    consider(x_only, 0.0);
    consider(0.0, y_only);
    for (std::size_t p = 0; p < active.size(); ++p) {
        for (std::size_t q = p + 1; q < active.size(); ++q) {
            const auto i = active[p], j = active[q];
            const double det = a[i] * b[j] - a[j] * b[i];
            if (std::abs(det) < 1e-300) continue;
            consider((e[i] * b[j] - e[j] * b[i]) / det, (a[i] * e[j] - a[j] * e[i]) / det);
        }
    }
    return std::isfinite(best);
}

} // namespace

Matrix KalmanSchedule::correction_covariance(int t, const Matrix& C) const {
    check_index(*this, t);
    const Matrix& P = Wt[static_cast<std::size_t>(t)];
    return symmetrize(Lt[static_cast<std::size_t>(t)] * C * P);
}

KalmanSchedule kalman_forward(const LinearSystem& system, const Matrix& W, const Matrix& S, int N,
                              const std::optional<Matrix>& W0, DareOptions options) {
    const int n = system.n();
    const int m = system.m();
    if (N < 1) throw Error(ErrorCategory::Configuration, "horizon must be >= 1");
    if (W.rows() != n || W.cols() != n) structural_error("W must be n x n");
    if (S.rows() != m || S.cols() != m) structural_error("S must be m x m");
    if (!is_psd(W)) throw Error(ErrorCategory::Assumption, "process noise covariance is not PSD");
    if (!is_symmetric(S, 1e-12) || min_eigenvalue(symmetrize(S)) <= 0.0 || condition_number(S) > kMaxCondition)
        throw SingularityError("measurement noise covariance S must be positive definite and well conditioned", -1);

    const Matrix& A = system.A();
    const Matrix& C = system.C();
    KalmanSchedule k;
    k.W = symmetrize(W);
    k.S = symmetrize(S);
    k.Wt.resize(static_cast<std::size_t>(N) + 1);
    k.Lt.resize(static_cast<std::size_t>(N) + 1);
    k.Wt[0] = W0 ? symmetrize(*W0) : Matrix::Zero(n, n);
    if (k.Wt[0].rows() != n || k.Wt[0].cols() != n) structural_error("W0 must be n x n");
    for (int t = 0; t <= N; ++t) {
        const Matrix& P = k.Wt[static_cast<std::size_t>(t)];
        const Matrix gainT = guarded_solve(innovation_covariance(P, C, k.S), C * P, t, "CWC' + S");
        k.Lt[static_cast<std::size_t>(t)] = gainT.transpose();
        if (t < N) {
            // AWA' + W - AWC'(CWC'+S)⁻¹CWA'
            k.Wt[static_cast<std::size_t>(t) + 1] = symmetrize(A * (P - P * C.transpose() * gainT) * A.transpose() + k.W);
        }
    }

    // The filter Riccati equation is the control DARE for (A', C', W, S).
    const auto dare = solve_dare(A.transpose(), C.transpose(), k.W, k.S, options);
    k.Winf = dare.V;
    k.Linf = guarded_solve(innovation_covariance(k.Winf, C, k.S), C * k.Winf, -1, "CW∞C' + S").transpose();
    k.filter_rho = spectral_radius(A * (Matrix::Identity(n, n) - k.Linf * C));
    return k;
}

Vector filter_correct(const LinearSystem& system, const KalmanSchedule& schedule, const Vector& xhat_pred,
                      const Vector& y, int t) {
    check_index(schedule, t);
    if (y.size() != system.m()) structural_error("measurement has the wrong dimension");
    return xhat_pred + schedule.Lt[static_cast<std::size_t>(t)] * (y - system.C() * xhat_pred);
}

FilterEstimate filter_step(const LinearSystem& system, const KalmanSchedule& schedule, const Vector& wbar,
                           const Vector& xhat_prev_post, const Vector& u_prev, const Vector& y, int t) {
    if (t < 1) throw Error(ErrorCategory::Structural, "filter_step needs t >= 1; use filter_correct at t = 0");
    check_index(schedule, t);
    FilterEstimate out;
    out.xhat_pred = system.A() * xhat_prev_post + system.B() * u_prev + wbar;
    out.xhat_post = filter_correct(system, schedule, out.xhat_pred, y, t);
    return out;
}

LqgGainSchedule synthesize(const LinearSystem& system, const CostSpec& cost, const KalmanSchedule& kalman,
                           double mu, const Vector& wbar) {
    const int N = cost.horizon();
    const int n = system.n();
    if (kalman.horizon() < N) structural_error("Kalman schedule shorter than the cost horizon");
    if (cost.Q().rows() != n || cost.R().rows() != system.p()) structural_error("cost dimensions do not match");
    if (wbar.size() != n) structural_error("wbar must have the state dimension");
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(ErrorCategory::Configuration, "mu must be finite and >= 0");

    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const Matrix& R = cost.R();
    LqgGainSchedule s;
    s.mu = mu;
    const auto uN = static_cast<std::size_t>(N);
    s.V.resize(uN);
    s.K.resize(uN);
    s.xi.resize(uN);
    s.l.resize(uN);
    s.Qmut.resize(uN);
    for (std::size_t t = 0; t < uN; ++t) s.Qmut[t] = inflated_penalty(cost.Q(), kalman.Wt[t + 1], mu);

    s.V[uN - 1] = s.Qmut[uN - 1];
    s.xi[uN - 1] = Vector::Zero(n);
    for (int t = N - 1; t >= 0; --t) {
        const auto ut = static_cast<std::size_t>(t);
        const Matrix& V = s.V[ut];
        const Matrix M = symmetrize(B.transpose() * V * B + R);
        s.K[ut] = -guarded_solve(M, B.transpose() * V * A, t, "B'VB + R");
        const Vector g = s.xi[ut] + V * wbar;
        s.l[ut] = -guarded_solve(M, B.transpose() * g, t, "B'VB + R");
        if (t > 0) {
            const Matrix closed = A + B * s.K[ut];
            s.V[ut - 1] = symmetrize(closed.transpose() * V * closed + s.K[ut].transpose() * R * s.K[ut] +
                                     s.Qmut[ut - 1]);
            s.xi[ut - 1] = closed.transpose() * g;
        }
    }
    return s;
}

namespace {

void check_schedules(const LinearSystem& system, const CostSpec& cost, const KalmanSchedule& kalman,
                     const LqgGainSchedule& schedule, const Vector& x0, const Vector& wbar) {
    if (schedule.horizon() != cost.horizon()) structural_error("gain schedule horizon does not match the cost");
    if (kalman.horizon() < cost.horizon()) structural_error("Kalman schedule shorter than the cost horizon");
    if (x0.size() != system.n() || wbar.size() != system.n()) structural_error("x0 / wbar dimension mismatch");
}

} // namespace

double evaluate_risk(const LinearSystem& system, const CostSpec& cost, const KalmanSchedule& kalman,
                     const LqgGainSchedule& schedule, const Vector& x0, const Vector& wbar) {
    check_schedules(system, cost, kalman, schedule, x0, wbar);
    const int N = cost.horizon();
    const int n = system.n();
    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const Matrix& Q = cost.Q();
    const Matrix& C = system.C();

    // Quadratic-affine risk-to-go on x̂_{t|t}: x'Θ_t x + 2η_t'x + γ_t, zero at t = N.
    Matrix Theta = Matrix::Zero(n, n);
    Vector eta = Vector::Zero(n);
    double gamma = 0.0;
    for (int t = N - 1; t >= 0; --t) {
        const auto ut = static_cast<std::size_t>(t);
        const Matrix H = symmetrize(4.0 * Q * kalman.Wt[ut + 1] * Q + Theta);
        const Vector& f = eta;
        const double g = gamma + (Theta * kalman.correction_covariance(t + 1, C)).trace();
        const Matrix closed = A + B * schedule.K[ut];
        const Vector b = B * schedule.l[ut] + wbar;
        const Vector Hb = H * b;
        gamma = g + b.dot(Hb) + 2.0 * b.dot(f);
        eta = closed.transpose() * (f + Hb);
        Theta = symmetrize(closed.transpose() * H * closed);
    }
    return x0.dot(Theta * x0) + 2.0 * eta.dot(x0) + gamma + (Theta * kalman.correction_covariance(0, C)).trace();
}

double fourth_moment_offset(const CostSpec& cost, const KalmanSchedule& kalman) {
    double total = 0.0;
    for (int t = 1; t <= cost.horizon(); ++t) {
        const Matrix QW = cost.Q() * kalman.Wt[static_cast<std::size_t>(t)];
        total += 2.0 * (QW * QW).trace();
    }
    return total;
}

DualValue dual_value(const LinearSystem& system, const CostSpec& cost, const KalmanSchedule& kalman,
                     const LqgGainSchedule& schedule, const Vector& x0, const Vector& wbar, double eps_bar) {
    check_schedules(system, cost, kalman, schedule, x0, wbar);
    const int N = cost.horizon();
    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const Matrix& R = cost.R();
    const Matrix& C = system.C();

    // Cost-to-go on x̂_{t|t}: x'P_t x + 2ζ_t'x + c_t.
    Matrix P;
    Vector zeta;
    double c = 0.0;
    for (int t = N - 1; t >= 0; --t) {
        const auto ut = static_cast<std::size_t>(t);
        const Matrix& V = schedule.V[ut];
        const Matrix& K = schedule.K[ut];
        const Vector& l = schedule.l[ut];
        const Matrix M = symmetrize(B.transpose() * V * B + R);
        const double d = (t == N - 1) ? 0.0 : c + (P * kalman.correction_covariance(t + 1, C)).trace();
        const Matrix closed = A + B * K;
        c = d + wbar.dot(V * wbar) - l.dot(M * l) + 2.0 * schedule.xi[ut].dot(wbar);
        zeta = closed.transpose() * (schedule.xi[ut] + V * wbar);
        P = symmetrize(closed.transpose() * V * closed + K.transpose() * R * K);
    }
    const Matrix& W0 = kalman.Wt[0];
    double g = -schedule.mu * eps_bar + x0.dot(cost.Q() * x0) + (cost.Q() * W0).trace();
    for (int t = 1; t <= N; ++t) g += (cost.Q() * kalman.Wt[static_cast<std::size_t>(t)]).trace();

    DualValue out;
    out.D = x0.dot(P * x0) + 2.0 * zeta.dot(x0) + c + (P * kalman.correction_covariance(0, C)).trace() + g;
    out.J_R = evaluate_risk(system, cost, kalman, schedule, x0, wbar);
    out.J = out.D - schedule.mu * out.J_R + schedule.mu * eps_bar;
    return out;
}

DareSolution steady_state(const LinearSystem& system, const CostSpec& cost, const KalmanSchedule& kalman,
                          double mu, DareOptions options) {
    return solve_dare(system.A(), system.B(), inflated_penalty(cost.Q(), kalman.Winf, mu), cost.R(), options);
}

ConvergenceDiagnostics convergence_diagnostics(const LinearSystem& system, const CostSpec& cost, const Matrix& W,
                                               const Matrix& S, double mu, int t0, int N,
                                               const std::optional<Matrix>& W0) {
    ConvergenceDiagnostics out;
    if (t0 >= N) throw Error(ErrorCategory::Configuration, "convergence diagnostics need t0 < N");
    const Matrix& Q = cost.Q();
    const double q_min = min_eigenvalue(symmetrize(Q));
    if (!(q_min > 0.0)) {
        out.reason = "state penalty Q is singular; the bound requires Q positive definite";
        return out;
    }
    out.applicable = true;

    // Index shift: local index s = t - t0 covers t = t0..N.
    const int span = N - t0;
    const CostSpec shifted = cost.with_horizon(span);
    const auto kalman = kalman_forward(system, W, S, span, W0);
    const auto schedule = synthesize(system, shifted, kalman, mu, Vector::Zero(system.n()));
    const auto steady = steady_state(system, cost, kalman, mu);
    const Matrix closed = system.A() + system.B() * steady.K;
    out.steady_rho = spectral_radius(closed);

    const double vnorm = spectral_norm(steady.V);
    const double qnorm = spectral_norm(Q);
    double power_sum = 0.0;
    {
        Matrix Pk = Matrix::Identity(system.n(), system.n());
        for (int k = 0; k < 100'000; ++k) {
            const double term = spectral_norm(Pk);
            power_sum += term;
            if (term <= 1e-16 * power_sum) break;
            if (!std::isfinite(term)) break;
            Pk = closed * Pk;
        }
    }
    out.C1 = std::pow(vnorm, 1.5) / std::sqrt(q_min);
    out.C2 = 4.0 * mu * qnorm * qnorm * std::sqrt(vnorm / q_min) * power_sum;

    // ‖Ā^{N-t-1}‖ for t = N-1 down to t0.
    std::vector<double> powers(static_cast<std::size_t>(span));
    {
        Matrix Pk = Matrix::Identity(system.n(), system.n());
        for (int k = 0; k < span; ++k) {
            powers[static_cast<std::size_t>(k)] = spectral_norm(Pk);
            Pk = closed * Pk;
        }
    }
    const double slack = 1e-10 * (1.0 + vnorm);
    std::vector<double> required;
    out.bound_satisfied = true;
    for (int s = 0; s < span; ++s) {
        const auto us = static_cast<std::size_t>(s);
        const int t = t0 + s;
        out.t.push_back(t);
        const double ve = spectral_norm(schedule.V[us] - steady.V);
        const double we = spectral_norm(kalman.Wt[us + 1] - kalman.Winf);
        const double pw = powers[static_cast<std::size_t>(N - t - 1)];
        out.V_error.push_back(ve);
        out.W_error.push_back(we);
        out.closed_loop_power.push_back(pw);
        if (ve > out.C1 * pw + out.C2 * we + slack) out.bound_satisfied = false;
        required.push_back(std::max(0.0, ve - slack));
    }
    out.fitted_feasible = envelope_fit(out.closed_loop_power, out.W_error, required, out.fitted_C1, out.fitted_C2);
    return out;
}

} // namespace ralq::lqg
