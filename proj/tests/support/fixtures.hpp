#pragma once

#include "ralq/model.hpp"
#include "ralq/scenario.hpp"

#include <random>

namespace fixture {

using ralq::Matrix;
using ralq::Vector;

inline Matrix random_matrix(std::mt19937_64& g, int r, int c, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Matrix M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = nd(g);
    return M;
}

/// Random PSD matrix F F' + floor·I.
inline Matrix random_psd(std::mt19937_64& g, int n, double floor = 0.0) {
    const Matrix F = random_matrix(g, n, n);
    return F * F.transpose() + floor * Matrix::Identity(n, n);
}

/// Random discrete noise with `atoms` support points.
inline ralq::NoiseSpec random_discrete(std::mt19937_64& g, int n, int atoms) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    std::vector<Vector> pts;
    std::vector<double> probs;
    double total = 0.0;
    for (int i = 0; i < atoms; ++i) {
        pts.push_back(random_matrix(g, n, 1));
        probs.push_back(u(g));
        total += probs.back();
    }
    for (auto& p : probs) p /= total;
    return ralq::NoiseSpec::discrete(std::move(pts), std::move(probs));
}

/// Toy scalar problem: x_{t+1} = x_t + u_t + w, w = 3 w.p. 1/3 else 0, Q = 1, R = 0.
inline ralq::Scenario toy(int N) {
    auto s = ralq::catalog_scenario("toy_scalar");
    s.cost = s.cost.with_horizon(N);
    return s;
}

} // namespace fixture
