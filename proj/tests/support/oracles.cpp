#include "oracles.hpp"

#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

ForwardFunctionals forward_lqr(const ralq::LinearSystem& sys, const ralq::CostSpec& cost,
                               const ralq::QWeightedMoments& mom, const std::vector<Matrix>& K,
                               const std::vector<Vector>& l, const Vector& x0) {
    const Matrix& A = sys.A();
    const Matrix& B = sys.B();
    const Matrix& Q = cost.Q();
    const Matrix& R = cost.R();
    const Matrix QWQ4 = 4.0 * Q * mom.W * Q;
    ForwardFunctionals out;
    Vector m = x0;
    Matrix S = Matrix::Zero(x0.size(), x0.size());
    out.J = m.dot(Q * m);
    for (std::size_t t = 0; t < K.size(); ++t) {
        const Vector um = K[t] * m + l[t];
        out.J += um.dot(R * um) + (K[t].transpose() * R * K[t] * S).trace();
        const Matrix closed = A + B * K[t];
        const Vector pm = closed * m + B * l[t] + mom.wbar; // mean of the prediction
        const Matrix pS = closed * S * closed.transpose(); // its covariance
        out.J_R += pm.dot(QWQ4 * pm) + (QWQ4 * pS).trace() + 2.0 * pm.dot(mom.m3);
        m = pm;
        S = pS + mom.W;
        out.J += m.dot(Q * m) + (Q * S).trace();
    }
    return out;
}

ForwardFunctionals forward_lqg(const ralq::LinearSystem& sys, const ralq::CostSpec& cost,
                               const ralq::lqg::KalmanSchedule& kalman, const std::vector<Matrix>& K,
                               const std::vector<Vector>& l, const Vector& wbar, const Vector& x0) {
    const Matrix& A = sys.A();
    const Matrix& B = sys.B();
    const Matrix& C = sys.C();
    const Matrix& Q = cost.Q();
    const Matrix& R = cost.R();
    auto correction = [&](std::size_t t) {
        const Matrix& P = kalman.Wt[t];
        const Matrix G = C * P * C.transpose() + kalman.S;
        return Matrix(P * C.transpose() * G.inverse() * C * P);
    };
    ForwardFunctionals out;
    // Distribution of the filtered estimate x̂_{t|t}.
    Vector m = x0;
    Matrix S = correction(0);
    out.J = m.dot(Q * m) + (Q * (kalman.Wt[0])).trace() + (Q * S).trace();
    for (std::size_t t = 0; t < K.size(); ++t) {
        const Vector um = K[t] * m + l[t];
        out.J += um.dot(R * um) + (K[t].transpose() * R * K[t] * S).trace();
        const Matrix closed = A + B * K[t];
        const Vector pm = closed * m + B * l[t] + wbar;
        const Matrix pS = closed * S * closed.transpose();
        const Matrix QWQ4 = 4.0 * Q * kalman.Wt[t + 1] * Q;
        out.J_R += pm.dot(QWQ4 * pm) + (QWQ4 * pS).trace();
        // E x_{t+1}'Q x_{t+1} = E x̂'Qx̂ + Tr(Q W_{t+1}) for the prediction x̂.
        out.J += pm.dot(Q * pm) + (Q * pS).trace() + (Q * kalman.Wt[t + 1]).trace();
        m = pm;
        S = pS + correction(t + 1);
    }
    return out;
}

double scalar_lagrangian(const ScalarTwoStage& p, double c0, double k1, double l1) {
    const std::size_t n = p.atoms.size();
    double J = p.q * p.x0 * p.x0 + p.r * c0 * c0;
    double mean_pen1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = p.a * p.x0 + p.b * c0 + p.atoms[i];
        mean_pen1 += p.probs[i] * p.q * x1 * x1;
    }
    double risk = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = p.a * p.x0 + p.b * c0 + p.atoms[i];
        const double u1 = k1 * x1 + l1;
        const double d1 = p.q * x1 * x1 - mean_pen1;
        double mean_pen2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double x2 = p.a * x1 + p.b * u1 + p.atoms[j];
            mean_pen2 += p.probs[j] * p.q * x2 * x2;
        }
        double inner_risk = 0.0;
        double inner_cost = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double x2 = p.a * x1 + p.b * u1 + p.atoms[j];
            const double d2 = p.q * x2 * x2 - mean_pen2;
            inner_risk += p.probs[j] * d2 * d2;
            inner_cost += p.probs[j] * p.q * x2 * x2;
        }
        J += p.probs[i] * (p.q * x1 * x1 + p.r * u1 * u1 + inner_cost);
        risk += p.probs[i] * (d1 * d1 + inner_risk);
    }
    return J + p.mu * (risk - p.eps);
}

namespace {

struct Closure {
    const std::function<double(const std::vector<double>&)>* f;
    std::size_t n;
};

double gsl_trampoline(const gsl_vector* v, void* params) {
    auto* c = static_cast<Closure*>(params);
    std::vector<double> x(c->n);
    for (std::size_t i = 0; i < c->n; ++i) x[i] = gsl_vector_get(v, i);
    return (*c->f)(x);
}

} // namespace

std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                double step, double size_tol, int max_iter) {
    const std::size_t n = x0.size();
    Closure closure{&f, n};
    gsl_multimin_function fn{&gsl_trampoline, n, &closure};
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* ss = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0[i]);
    gsl_vector_set_all(ss, step);
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, x, ss);
    for (int it = 0; it < max_iter; ++it) {
        if (gsl_multimin_fminimizer_iterate(s) != 0) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), size_tol) == GSL_SUCCESS) break;
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = gsl_vector_get(s->x, i);
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(x);
    gsl_vector_free(ss);
    return out;
}

double scalar_lagrangian_min(const ScalarTwoStage& p) {
    const std::function<double(const std::vector<double>&)> f = [&](const std::vector<double>& v) {
        return scalar_lagrangian(p, v[0], v[1], v[2]);
    };
    std::vector<double> x{0.0, 0.0, 0.0};
    double best = f(x);
    // Restarts with shrinking simplices polish the minimizer.
    for (double step : {1.0, 0.1, 1e-2, 1e-3, 1e-4}) {
        for (int rep = 0; rep < 3; ++rep) {
            auto cand = nelder_mead(f, x, step, 1e-13, 20000);
            const double v = f(cand);
            if (v <= best) {
                best = v;
                x = cand;
            }
        }
    }
    return best;
}

std::vector<Matrix> lyapunov_iteration(const Matrix& A, const Matrix& W, int N) {
    std::vector<Matrix> out;
    out.push_back(Matrix::Zero(A.rows(), A.rows()));
    for (int t = 0; t < N; ++t) out.push_back(A * out.back() * A.transpose() + W);
    return out;
}

bool scalar_leqg_completes(double a, double b, double q, double r, double w, double theta, int N) {
    double V = q;
    for (int t = 0; t < N; ++t) {
        const double denom = 1.0 - theta * w * V;
        if (denom <= 0.0) return false;
        const double Vt = V / denom;
        const double K = -b * Vt * a / (b * b * Vt + r);
        V = q + (a + b * K) * (a + b * K) * Vt + r * K * K;
    }
    return true;
}

double lag1_autocorrelation(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 3) throw std::invalid_argument("need at least 3 samples");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        den += (xs[i] - mean) * (xs[i] - mean);
        if (i + 1 < n) num += (xs[i] - mean) * (xs[i + 1] - mean);
    }
    return num / den;
}

} // namespace oracle
