#pragma once

#include "ralq/linalg.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

namespace ralq {

/// Plant x_{t+1} = A x_t + B u_t + w_{t+1},  y_t = C x_t + v_t.
class LinearSystem {
public:
    /// Validates dimensions and finiteness; throws Error(Structural) otherwise.
    LinearSystem(Matrix A, Matrix B, Matrix C);

    /// Fully observed plant (C = I).
    static LinearSystem fully_observed(Matrix A, Matrix B);

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    const Matrix& C() const { return C_; }
    int n() const { return static_cast<int>(A_.rows()); }
    int p() const { return static_cast<int>(B_.cols()); }
    int m() const { return static_cast<int>(C_.rows()); }

private:
    Matrix A_, B_, C_;
};

/// Quadratic stage penalties and horizon. R ⪰ 0 is accepted; invertibility of
/// B'VB + R is checked per step during synthesis.
class CostSpec {
public:
    CostSpec(Matrix Q, Matrix R, int horizon);

    const Matrix& Q() const { return Q_; }
    const Matrix& R() const { return R_; }
    int horizon() const { return horizon_; }

    CostSpec with_horizon(int horizon) const { return CostSpec(Q_, R_, horizon); }

private:
    Matrix Q_, R_;
    int horizon_;
};

// ---------------------------------------------------------------------------
// Noise distributions
// ---------------------------------------------------------------------------

class NoiseSpec;

struct GaussianNoise {
    Vector mean;
    Matrix cov;
};

struct DiscreteNoise {
    std::vector<Vector> atoms;
    std::vector<double> probs;
};

struct GaussianMixtureNoise {
    std::vector<double> weights;
    std::vector<Vector> means;
    std::vector<Matrix> covs;
};

/// Disturbance injected through a matrix: w = G d with d ~ inner.
struct ChannelNoise {
    std::shared_ptr<const NoiseSpec> inner;
    Matrix G;
};

class NoiseSpec {
public:
    using Kind = std::variant<GaussianNoise, DiscreteNoise, GaussianMixtureNoise, ChannelNoise>;

    static NoiseSpec gaussian(Vector mean, Matrix cov);
    static NoiseSpec discrete(std::vector<Vector> atoms, std::vector<double> probs);
    static NoiseSpec gaussian_mixture(std::vector<double> weights, std::vector<Vector> means,
                                      std::vector<Matrix> covs);
    static NoiseSpec channel(NoiseSpec inner, Matrix G);

    /// Zero-mean Gaussian of dimension n with zero covariance (deterministic).
    static NoiseSpec zero(int n);

    const Kind& kind() const { return kind_; }
    int dim() const;

    Vector mean() const;
    Matrix covariance() const;

    /// True for Gaussians and channels of Gaussians.
    bool is_gaussian() const;

    /// Finite moments of every order (gaussian, discrete, mixtures and channels of those).
    bool has_all_moments() const { return true; }

    /// Same distribution shifted to zero mean.
    NoiseSpec centered() const;

private:
    explicit NoiseSpec(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

// ---------------------------------------------------------------------------
// Q-weighted moments
// ---------------------------------------------------------------------------

struct AnalyticSource {};

struct MonteCarloSource {
    long samples = 0;
    std::uint64_t seed = 0;
    /// Standard errors of the estimates: per-component for M3, scalar for m4.
    Vector M3_std_error;
    double m4_std_error = 0.0;
};

using MomentSource = std::variant<AnalyticSource, MonteCarloSource>;

/// Moments of δ = w - w̄ contracted with the state penalty Q:
///   m3 = 2 Q E{δ δ'Qδ},  M3 = 2 E{δ δ'Qδ},  m4 = E{(δ'Qδ - Tr(QW))²}.
struct QWeightedMoments {
    Vector wbar;
    Matrix W;
    Vector m3;
    Vector M3;
    double m4 = 0.0;
    MomentSource source;

    bool is_analytic() const { return std::holds_alternative<AnalyticSource>(source); }
};

struct MonteCarloConfig {
    long samples = 1'000'000;
    std::uint64_t seed = 0;
};

inline constexpr long kMinMonteCarloSamples = 10'000;

/// Analytic for gaussian / discrete (and channels thereof); seeded Monte Carlo otherwise.
QWeightedMoments compute_moments(const NoiseSpec& noise, const Matrix& Q,
                                 std::optional<MonteCarloConfig> mc = std::nullopt);

/// Force the Monte-Carlo path regardless of kind (used to cross-check analytic moments).
QWeightedMoments compute_moments_monte_carlo(const NoiseSpec& noise, const Matrix& Q,
                                             MonteCarloConfig mc);

/// Moments of a Gaussian with covariance W (m3 = 0, m4 = 2 Tr((QW)²)).
QWeightedMoments gaussian_moments(const Vector& wbar, const Matrix& W, const Matrix& Q);

/// Precomputed sampler; draw(seed, index, channel) is a pure function of its arguments.
class NoiseSampler {
public:
    explicit NoiseSampler(const NoiseSpec& noise);

    int dim() const { return dim_; }
    Vector draw(std::uint64_t seed, std::uint64_t index, std::uint64_t channel) const;

private:
    struct Node;
    std::shared_ptr<const Node> root_;
    int dim_;
};

/// `count` deterministic draws: draw i uses stream (seed, i).
std::vector<Vector> sample_noise(const NoiseSpec& noise, std::uint64_t seed, long count);

// ---------------------------------------------------------------------------
// Structural assumptions
// ---------------------------------------------------------------------------

struct AssumptionReport {
    bool ab_stabilizable = false;
    bool aq_detectable = false;
    bool r_positive_definite = false;
    // Present only when a measurement covariance was supplied.
    std::optional<bool> ac_detectable;
    std::optional<bool> aw_stabilizable;
    std::optional<bool> s_positive_definite;

    /// (A,B) stabilizable, (A,Q^{1/2}) detectable, R ≻ 0.
    bool lqr_ok() const { return ab_stabilizable && aq_detectable && r_positive_definite; }
    /// lqr_ok() plus the filtering conditions.
    bool lqg_ok() const {
        return lqr_ok() && ac_detectable.value_or(false) && aw_stabilizable.value_or(false) &&
               s_positive_definite.value_or(false);
    }
};

/// PBH rank test on every eigenvalue with |λ| >= 1 (rank tolerance relative to σ_max).
bool is_stabilizable(const Matrix& A, const Matrix& B, double rel_tol = 1e-9);
bool is_detectable(const Matrix& A, const Matrix& C, double rel_tol = 1e-9);

AssumptionReport validate_assumptions(const LinearSystem& system, const CostSpec& cost,
                                      const Matrix& W, const std::optional<Matrix>& S = std::nullopt);

} // namespace ralq
