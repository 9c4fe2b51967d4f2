#pragma once

#include "ralq/lqg.hpp"
#include "ralq/lqr.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace ralq::duality {

/// ε̄ = ε - N·m4 for time-invariant moments.
double eps_to_eps_bar(double eps, const QWeightedMoments& moments, int N);

/// ε̄ = ε - Σ_{t=1}^N 2 Tr((Q W_t)²) for the Gaussian partially observed case.
double eps_to_eps_bar(double eps, const CostSpec& cost, const lqg::KalmanSchedule& kalman);

enum class Mode { Lqr, Lqg };

struct Evaluation {
    double mu = 0.0;
    double D = 0.0;
    double J = 0.0;
    double J_R = 0.0;
};

/// One risk-constrained problem instance; evaluate(μ) synthesizes u*(μ) and reports its functionals.
class RiskAwareProblem {
public:
    /// Fully observed.
    RiskAwareProblem(LinearSystem system, CostSpec cost, QWeightedMoments moments, Vector x0);

    /// Partially observed Gaussian; the Kalman schedule is shared by every μ.
    RiskAwareProblem(LinearSystem system, CostSpec cost, lqg::KalmanSchedule kalman, Vector wbar, Vector x0);

    Mode mode() const { return mode_; }
    const LinearSystem& system() const { return system_; }
    const CostSpec& cost() const { return cost_; }
    const Vector& x0() const { return x0_; }

    double eps_bar(double eps) const;

    /// J_R(u*(μ)) only.
    double risk(double mu) const;

    /// D(μ), J and J_R at u*(μ), with the dual function taken at the given ε̄.
    Evaluation evaluate(double mu, double eps_bar) const;

private:
    Mode mode_;
    LinearSystem system_;
    CostSpec cost_;
    Vector x0_;
    std::optional<QWeightedMoments> moments_;
    std::optional<lqg::KalmanSchedule> kalman_;
    Vector wbar_;
};

struct BisectionConfig {
    double mu_min = 0.0;
    double mu_max = 1e8;
    double tol = 1e-8;
    int max_iters = 200;
};

enum class BisectionStatus { Interior, BoundaryZero, Infeasible };

std::string_view to_string(BisectionStatus status);

/// The three optimality conditions for (u*(μ*), μ*).
struct Certificates {
    bool lagrangian_minimized = true; ///< by construction of u*(μ)
    bool primal_feasible = false;     ///< J_R ≤ ε̄ within tolerance
    bool complementary_slackness = false;
    double feasibility_gap = 0.0;     ///< J_R - ε̄
};

struct BisectionResult {
    double mu_star = 0.0;
    double J = 0.0;
    double J_R = 0.0;
    double eps_bar = 0.0;
    BisectionStatus status = BisectionStatus::Infeasible;
    double cs_residual = 0.0; ///< |μ*(J_R - ε̄)|
    int iters = 0;
    Certificates certificates;
};

/// Smallest μ with J_R(u*(μ)) ≤ ε̄ by bisection on the nonincreasing map μ ↦ J_R(u*(μ)).
/// The search interval is [config.mu_min, config.mu_max].
BisectionResult bisect(const RiskAwareProblem& problem, double eps, BisectionConfig config = {});

struct InfimumEstimate {
    double eps_bar_inf_estimate = 0.0;
    double mu_probe = 0.0;
    bool reliable = false;
    std::vector<std::pair<double, double>> probes; ///< (μ, J_R)
};

/// J_R at μ = 1e8, checked against μ = 1e6 and 1e7 (successive values within 1e-6 relative).
InfimumEstimate eps_infimum_estimate(const RiskAwareProblem& problem);

} // namespace ralq::duality
