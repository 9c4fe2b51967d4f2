#include "ralq/lqr.hpp"

#include "ralq/error.hpp"

#include <cmath>

namespace ralq {

Matrix inflated_penalty(const Matrix& Q, const Matrix& W, double mu) {
    return symmetrize(Q + 4.0 * mu * Q * W * Q);
}

namespace lqr {

namespace {

void check_problem(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments) {
    const int n = system.n();
    if (cost.Q().rows() != n) structural_error("Q must be n x n");
    if (cost.R().rows() != system.p()) structural_error("R must be p x p");
    if (moments.W.rows() != n || moments.wbar.size() != n || moments.m3.size() != n)
        structural_error("noise moments must have the state dimension");
}

void check_schedule(const LinearSystem& system, const CostSpec& cost, const GainSchedule& schedule) {
    const int N = cost.horizon();
    if (schedule.horizon() != N || static_cast<int>(schedule.l.size()) != N ||
        static_cast<int>(schedule.V.size()) != N + 1 || static_cast<int>(schedule.xi.size()) != N + 1)
        structural_error("gain schedule horizon does not match the cost horizon");
    if (schedule.K.front().rows() != system.p() || schedule.K.front().cols() != system.n())
        structural_error("gain schedule does not match the system dimensions");
}

void check_mu(double mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(ErrorCategory::Configuration, "mu must be finite and >= 0");
}

} // namespace

GainSchedule synthesize(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments,
                        double mu) {
    check_problem(system, cost, moments);
    check_mu(mu);
    const int N = cost.horizon();
    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const Matrix& R = cost.R();
    const Vector& wbar = moments.wbar;

    GainSchedule s;
    s.mu = mu;
    s.Qmu = inflated_penalty(cost.Q(), moments.W, mu);
    s.V.resize(N + 1);
    s.xi.resize(N + 1);
    s.c.resize(N + 1);
    s.K.resize(N);
    s.l.resize(N);
    s.V[N] = s.Qmu;
    s.xi[N] = mu * moments.m3;
    s.c[N] = 0.0;

    for (int t = N - 1; t >= 0; --t) {
        const Matrix& Vn = s.V[t + 1];
        auto step = rde_step(Vn, A, B, s.Qmu, R, t);
        const Matrix M = symmetrize(B.transpose() * Vn * B + R);
        const Vector g = s.xi[t + 1] + Vn * wbar;
        const Matrix closed = A + B * step.K;
        s.xi[t] = closed.transpose() * g + mu * moments.m3;
        s.l[t] = -guarded_solve(M, B.transpose() * g, t, "B'VB + R");
        s.c[t] = s.c[t + 1] + (moments.W * Vn).trace() + 2.0 * s.xi[t + 1].dot(wbar) + wbar.dot(Vn * wbar) -
                 s.l[t].dot(M * s.l[t]);
        s.V[t] = std::move(step.V);
        s.K[t] = std::move(step.K);
    }
    return s;
}

AffineDecomposition affine_decomposition(const LinearSystem& system, const GainSchedule& schedule) {
    const int N = schedule.horizon();
    const int n = system.n();
    AffineDecomposition d;
    d.S.resize(N + 1);
    d.T.resize(N + 1);
    d.S[N] = Matrix::Identity(n, n);
    d.T[N] = Matrix::Zero(n, n);
    for (int t = N - 1; t >= 0; --t) {
        const Matrix closedT = (system.A() + system.B() * schedule.K[t]).transpose();
        d.S[t] = closedT * d.S[t + 1] + Matrix::Identity(n, n);
        d.T[t] = closedT * (d.T[t + 1] + schedule.V[t + 1]);
    }
    return d;
}

SteadyGains steady_state(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments,
                         double mu, DareOptions options) {
    check_problem(system, cost, moments);
    check_mu(mu);
    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const int n = system.n();
    const Matrix Qmu = inflated_penalty(cost.Q(), moments.W, mu);
    auto dare = solve_dare(A, B, Qmu, cost.R(), options);

    SteadyGains g;
    g.V = std::move(dare.V);
    g.K = std::move(dare.K);
    g.rho = dare.rho;
    const Matrix closedT = (A + B * g.K).transpose();
    g.xi = guarded_solve(Matrix::Identity(n, n) - closedT, closedT * g.V * moments.wbar + mu * moments.m3, -1,
                         "I - (A+BK)'");
    const Matrix M = symmetrize(B.transpose() * g.V * B + cost.R());
    g.l = -guarded_solve(M, B.transpose() * (g.xi + g.V * moments.wbar), -1, "B'VB + R");
    return g;
}

double evaluate_risk(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments,
                     const GainSchedule& schedule, const Vector& x0) {
    check_problem(system, cost, moments);
    check_schedule(system, cost, schedule);
    if (x0.size() != system.n()) structural_error("x0 must have the state dimension");
    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const Matrix& Q = cost.Q();
    const Matrix& W = moments.W;
    const Vector& m3 = moments.m3;
    const Matrix QWQ4 = symmetrize(4.0 * Q * W * Q);

    Matrix P = QWQ4;
    Vector zeta = m3;
    double d = 0.0;
    for (int t = schedule.horizon(); t >= 1; --t) {
        const Matrix closed = A + B * schedule.K[t - 1];
        const Vector b = B * schedule.l[t - 1] + moments.wbar;
        const Matrix P_prev = symmetrize(closed.transpose() * P * closed + QWQ4);
        const Vector zeta_prev = closed.transpose() * zeta + m3 + closed.transpose() * (P * b);
        d = d + ((P_prev - QWQ4) * W).trace() + 2.0 * zeta.dot(b) + b.dot(P * b);
        P = P_prev;
        zeta = zeta_prev;
    }
    const Matrix P0 = P - QWQ4;
    return x0.dot(P0 * x0) + 2.0 * (zeta - m3).dot(x0) + d - (P0 * W).trace();
}

DualValue dual_value(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments,
                     const GainSchedule& schedule, const Vector& x0, double eps_bar) {
    DualValue out;
    out.J_R = evaluate_risk(system, cost, moments, schedule, x0);
    const double mu = schedule.mu;
    const int N = cost.horizon();
    const Matrix WQ = moments.W * cost.Q();
    const double cost_to_go = x0.dot((schedule.V[0] - schedule.Qmu) * x0) +
                              2.0 * (schedule.xi[0] - mu * moments.m3).dot(x0) + schedule.c[0];
    const double g = mu * (-eps_bar - 4.0 * N * (WQ * WQ).trace()) + x0.dot(cost.Q() * x0);
    out.D = cost_to_go + g;
    out.J = out.D - mu * out.J_R + mu * eps_bar;
    return out;
}

TrackingForm tracking_reformulation(const CostSpec& cost, const QWeightedMoments& moments, double mu) {
    check_mu(mu);
    const Matrix& Q = cost.Q();
    TrackingForm f;
    f.target = -mu * moments.M3;
    f.extra_penalty = symmetrize(4.0 * mu * Q * moments.W * Q);
    f.constant = -mu * mu * moments.M3.dot(Q * moments.M3);
    return f;
}

double lagrangian_stage_cost(const CostSpec& cost, const QWeightedMoments& moments, double mu, const Vector& x,
                             const Vector& u) {
    const Matrix Qmu = inflated_penalty(cost.Q(), moments.W, mu);
    return x.dot(Qmu * x) + 2.0 * mu * moments.m3.dot(x) + u.dot(cost.R() * u);
}

double tracking_stage_cost(const CostSpec& cost, const TrackingForm& form, const Vector& x, const Vector& u) {
    const Vector e = x - form.target;
    return e.dot(cost.Q() * e) + x.dot(form.extra_penalty * x) + u.dot(cost.R() * u) + form.constant;
}

} // namespace lqr
} // namespace ralq
