#include "fixtures.hpp"

#include "ralq/error.hpp"
#include "ralq/riccati.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ralq;

TEST(Riccati, StepMatchesScalarFormula) {
    const double a = 1.3, b = 0.7, q = 2.0, r = 0.5, v = 3.0;
    const auto s = rde_step(Matrix::Constant(1, 1, v), Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b),
                            Matrix::Constant(1, 1, q), Matrix::Constant(1, 1, r));
    const double k = -b * v * a / (b * b * v + r);
    EXPECT_NEAR(s.K(0, 0), k, 1e-14);
    EXPECT_NEAR(s.V(0, 0), a * a * v + q - a * v * b * b * v * a / (b * b * v + r), 1e-13);
    // Joseph form gives the same value.
    EXPECT_NEAR(s.V(0, 0), q + r * k * k + (a + b * k) * (a + b * k) * v, 1e-13);
}

TEST(Riccati, StepRaisesOnSingularGainSystem) {
    EXPECT_THROW(rde_step(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                          Matrix::Zero(1, 1), 3),
                 SingularityError);
}

TEST(Riccati, DareIsFixedPointAndStabilizing) {
    std::mt19937_64 g(21);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix A = fixture::random_matrix(g, 3, 3, 0.8);
        const Matrix B = fixture::random_matrix(g, 3, 2);
        const Matrix Q = fixture::random_psd(g, 3, 0.5);
        const Matrix R = fixture::random_psd(g, 2, 0.5);
        const auto sol = solve_dare(A, B, Q, R);
        const auto step = rde_step(sol.V, A, B, Q, R);
        EXPECT_LT((step.V - sol.V).norm(), 1e-9 * (1.0 + sol.V.norm()));
        EXPECT_LT(sol.rho, 1.0);
        EXPECT_NEAR(sol.rho, spectral_radius(A + B * sol.K), 1e-12);
    }
}

TEST(Riccati, DareScalarClosedForm) {
    // Scalar DARE v = a²v + q - a²b²v²/(b²v + r), a = 2, b = 1, q = 1, r = 1: v² - 4v - 1 = 0.
    const auto sol = solve_dare(Matrix::Constant(1, 1, 2.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                Matrix::Ones(1, 1));
    EXPECT_NEAR(sol.V(0, 0), 2.0 + std::sqrt(5.0), 1e-10);
}

TEST(Riccati, DareFailsWhenUnstabilizable) {
    Matrix A(2, 2);
    A << 1.5, 0.0, 0.0, 0.5;
    Matrix B(2, 1);
    B << 0.0, 1.0;
    EXPECT_THROW(solve_dare(A, B, Matrix::Identity(2, 2), Matrix::Identity(1, 1), DareOptions{1e-12, 5000}),
                 Error);
}

TEST(Riccati, DifferenceIdentityHoldsForPerturbedPenalty) {
    std::mt19937_64 g(8);
    const int n = 3, N = 30;
    const Matrix A = fixture::random_matrix(g, n, n, 0.6);
    const Matrix B = fixture::random_matrix(g, n, 2);
    const Matrix R = fixture::random_psd(g, 2, 0.5);
    std::vector<Matrix> Q, Qbar, V{Matrix()}, Vbar{Matrix()}, K, L;
    for (int t = 0; t < N; ++t) {
        Q.push_back(fixture::random_psd(g, n, 0.1));
        Qbar.push_back(fixture::random_psd(g, n, 0.1));
    }
    const Matrix QN = fixture::random_psd(g, n, 0.1), QbarN = fixture::random_psd(g, n, 0.1);
    V.assign(N + 1, Matrix());
    Vbar.assign(N + 1, Matrix());
    K.assign(N, Matrix());
    L.assign(N, Matrix());
    V[N] = QN;
    Vbar[N] = QbarN;
    for (int t = N - 1; t >= 0; --t) {
        auto a = rde_step(V[t + 1], A, B, Q[t], R, t);
        auto b = rde_step(Vbar[t + 1], A, B, Qbar[t], R, t);
        V[t] = a.V;
        K[t] = a.K;
        Vbar[t] = b.V;
        L[t] = b.K;
    }
    const double res = riccati_difference_identity(V, Vbar, K, L, Q, Qbar, A, B);
    double vmax = 0.0;
    for (const auto& M : V) vmax = std::max(vmax, spectral_norm(M));
    EXPECT_LE(res, 1e-9 * (1.0 + vmax));
}

TEST(Riccati, DifferenceIdentityDetectsWrongGain) {
    const Matrix A = Matrix::Identity(1, 1) * 1.1;
    const Matrix B = Matrix::Ones(1, 1);
    const Matrix R = Matrix::Ones(1, 1);
    std::vector<Matrix> Q{Matrix::Ones(1, 1)};
    std::vector<Matrix> Qbar{Matrix::Constant(1, 1, 2.0)};
    const auto a = rde_step(Q[0], A, B, Q[0], R);
    const auto b = rde_step(Qbar[0], A, B, Qbar[0], R);
    std::vector<Matrix> V{a.V, Q[0]}, Vbar{b.V, Qbar[0]};
    std::vector<Matrix> K{a.K}, L{Matrix(b.K * 0.5)};
    EXPECT_GT(riccati_difference_identity(V, Vbar, K, L, Q, Qbar, A, B), 1e-3);
}
