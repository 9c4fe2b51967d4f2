#include "ralq/baselines.hpp"

#include "ralq/error.hpp"

#include <cmath>
#include <string>

namespace ralq::baselines {

namespace {

// Smallest eigenvalue of I + s·X½ Y X½ for PSD X and symmetric Y (the spectrum of I + s·XY).
double shifted_min_eig(const Matrix& X, const Matrix& Y, double s) {
    const Matrix r = psd_sqrt(X);
    const auto n = X.rows();
    return min_eigenvalue(symmetrize(Matrix::Identity(n, n) + s * r * Y * r));
}

} // namespace

LeqgGains try_synthesize_leqg(const LinearSystem& system, const CostSpec& cost, const Matrix& W, const Vector& wbar,
                              double theta, LeqgMode mode) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw Error(ErrorCategory::Configuration, "theta must be > 0");
    const int n = system.n();
    const int N = cost.horizon();
    if (W.rows() != n || W.cols() != n || wbar.size() != n) structural_error("noise statistics dimension mismatch");
    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const Matrix& Q = cost.Q();
    const Matrix& R = cost.R();
    const Matrix I = Matrix::Identity(n, n);
    const auto uN = static_cast<std::size_t>(N);

    LeqgGains g;
    g.theta = theta;
    g.mode = mode;
    g.V.resize(uN + 1);
    g.xi.resize(uN + 1);
    g.K.resize(uN);
    g.l.resize(uN);
    g.V[uN] = symmetrize(Q);
    g.xi[uN] = Vector::Zero(n);

    for (int t = N; t >= 1; --t) {
        const auto ut = static_cast<std::size_t>(t);
        const Matrix& V = g.V[ut];
        if (shifted_min_eig(W, V, -theta) <= 0.0) {
            g.valid_up_to = t;
            return g;
        }
        // Ṽ = (I - θVW)⁻¹V = (V⁻¹ - θW)⁻¹ without inverting V.
        const Matrix Imvw = I - theta * V * W;
        const Matrix Vt = symmetrize(guarded_solve(Imvw, V, t, "I - θVW"));
        const Vector xit = guarded_solve(Imvw, g.xi[ut], t, "I - θVW");
        const Matrix M = symmetrize(B.transpose() * Vt * B + R);
        const Vector h = xit + Vt * wbar;
        g.K[ut - 1] = -guarded_solve(M, B.transpose() * Vt * A, t - 1, "B'ṼB + R");
        g.l[ut - 1] = -guarded_solve(M, B.transpose() * h, t - 1, "B'ṼB + R");
        const Matrix closed = A + B * g.K[ut - 1];
        g.V[ut - 1] = symmetrize(Q + closed.transpose() * Vt * closed + g.K[ut - 1].transpose() * R * g.K[ut - 1]);
        g.xi[ut - 1] = closed.transpose() * h;
    }

    if (!mode.partially_observed()) return g;

    const Matrix& C = system.C();
    const Matrix& S = *mode.S;
    if (S.rows() != system.m() || S.cols() != system.m()) structural_error("S must be m x m");
    const Matrix info = symmetrize(C.transpose() * guarded_solve(S, C, -1, "S") - theta * Q);
    g.P.resize(uN + 1);
    g.Ptilde.resize(uN + 1);
    g.coupling.resize(uN);
    g.P[0] = Matrix::Zero(n, n);
    for (int t = 0; t <= N; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        const Matrix& P = g.P[ut];
        if (shifted_min_eig(P, info, 1.0) <= 0.0) {
            g.valid_up_to = t;
            return g;
        }
        // P̃ = (P⁻¹ + C'S⁻¹C - θQ)⁻¹ = (I + P·info)⁻¹ P
        g.Ptilde[ut] = symmetrize(guarded_solve(I + P * info, P, t, "I + P(C'S⁻¹C - θQ)"));
        if (t < N) {
            g.P[ut + 1] = symmetrize(A * g.Ptilde[ut] * A.transpose() + W);
            const Matrix future = g.V[ut] - Q;
            if (shifted_min_eig(g.Ptilde[ut], future, -theta) <= 0.0) {
                g.valid_up_to = t;
                return g;
            }
            g.coupling[ut] = guarded_solve(I - theta * g.Ptilde[ut] * future, I, t, "I - θP̃(V - Q)");
        }
    }
    return g;
}

LeqgGains synthesize_leqg(const LinearSystem& system, const CostSpec& cost, const Matrix& W, const Vector& wbar,
                          double theta, LeqgMode mode) {
    auto g = try_synthesize_leqg(system, cost, W, wbar, theta, mode);
    if (!g.completed())
        throw BreakdownError("exponential-cost recursion is not well posed at stage " + std::to_string(g.valid_up_to) +
                                 " for theta = " + std::to_string(theta),
                             g.valid_up_to);
    return g;
}

BreakdownSearch find_breakdown_theta(const LinearSystem& system, const CostSpec& cost, const Matrix& W, double tol,
                                     LeqgMode mode, double cap) {
    if (!(tol > 0.0)) throw Error(ErrorCategory::Configuration, "tolerance must be > 0");
    const Vector zero = Vector::Zero(system.n());
    BreakdownSearch out;
    auto ok = [&](double theta) {
        ++out.evaluations;
        return try_synthesize_leqg(system, cost, W, zero, theta, mode).completed();
    };
    double lo = 1e-12;
    if (!ok(lo)) throw Error(ErrorCategory::Assumption, "exponential-cost recursion fails even at theta = 1e-12");
    double hi = std::max(lo, 1e-6);
    while (ok(hi)) {
        lo = hi;
        if (hi >= cap) {
            out.theta = cap;
            out.reached_cap = true;
            return out;
        }
        hi = std::min(2.0 * hi, cap);
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            lo = mid;
        else
            hi = mid;
    }
    out.theta = lo;
    return out;
}

lqr::GainSchedule risk_neutral(const LinearSystem& system, const CostSpec& cost, const QWeightedMoments& moments) {
    return lqr::synthesize(system, cost, moments, 0.0);
}

} // namespace ralq::baselines
