#pragma once

#include "ralq/baselines.hpp"
#include "ralq/lqg.hpp"
#include "ralq/lqr.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ralq::sim {

struct StateFeedbackLaw {
    std::vector<Matrix> K;
    std::vector<Vector> l;
};

/// Kalman-filtered certainty-equivalent law u_t = K[t] x̂_{t|t} + l[t].
struct FilteredLaw {
    lqg::KalmanSchedule kalman;
    std::vector<Matrix> K;
    std::vector<Vector> l;
    Vector wbar;
};

/// Risk-sensitive estimator with the exponential-cost coupling.
struct LeqgOutputLaw {
    baselines::LeqgGains gains;
    Matrix Q;
    Vector wbar;
};

struct Controller {
    std::string id;
    std::variant<StateFeedbackLaw, FilteredLaw, LeqgOutputLaw> law;

    static Controller from_lqr(std::string id, const lqr::GainSchedule& schedule);
    /// Time-invariant gains repeated over N steps.
    static Controller constant(std::string id, const Matrix& K, const Vector& l, int N);
    static Controller from_lqg(std::string id, const lqg::KalmanSchedule& kalman,
                               const lqg::LqgGainSchedule& schedule, const Vector& wbar);
    /// State feedback when the gains were synthesized fully observed, the risk-sensitive filter otherwise.
    static Controller from_leqg(std::string id, const baselines::LeqgGains& gains, const Matrix& Q,
                                const Vector& wbar);

    int horizon() const;
    bool needs_measurements() const;
};

/// One closed-loop run. Columns are time indices.
struct SimulationTrace {
    Matrix states;            ///< n × (N+1), x_0..x_N
    Matrix inputs;            ///< p × N
    Matrix process_noise;     ///< n × N, column t holds w_{t+1}
    Matrix outputs;           ///< m × N (partially observed only)
    Matrix measurement_noise; ///< m × N (partially observed only)
    Matrix xhat_pred;         ///< n × (N+1), x̂_0..x̂_N (filtered controllers only)
    Matrix xhat_post;         ///< n × N (filtered controllers only)
    Vector state_penalty;     ///< x_t'Qx_t, t = 0..N
    Vector input_penalty;     ///< u_t'Ru_t, t = 0..N-1
    std::uint64_t seed = 0;
    std::string controller_id;

    int horizon() const { return static_cast<int>(inputs.cols()); }
    bool has_estimates() const { return xhat_pred.cols() > 0; }
    double total_cost() const { return state_penalty.sum() + input_penalty.sum(); }
};

/// Process noise w_{t+1} is drawn from stream (seed, t+1, Process) and v_t from (seed, t, Measurement),
/// so any two controllers run with the same seed see identical noise.
SimulationTrace rollout(const LinearSystem& system, const CostSpec& cost, const Controller& controller,
                        const NoiseSpec& process, const std::optional<NoiseSpec>& measurement, const Vector& x0,
                        int N, std::uint64_t seed);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    long samples = 0;
};

/// Reference model for the conditional mean E(x_t'Qx_t | F_{t-1}).
struct FullyObservedModel {
    Matrix W;
    Vector wbar;
};

struct FilteredModel {
    lqg::KalmanSchedule kalman;
};

using PredictiveModel = std::variant<FullyObservedModel, FilteredModel>;

/// Streaming estimate of E Σ_{t=1}^N Δ_t², Δ_t = x_t'Qx_t - (x̂_t'Qx̂_t + Tr(Q W_t)).
class PredictiveVarianceAccumulator {
public:
    PredictiveVarianceAccumulator(LinearSystem system, CostSpec cost, PredictiveModel model);

    void add(const SimulationTrace& trace);
    Estimate result() const;

private:
    LinearSystem system_;
    CostSpec cost_;
    PredictiveModel model_;
    long count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

Estimate estimate_predictive_variance(std::span<const SimulationTrace> traces, const LinearSystem& system,
                                      const CostSpec& cost, const PredictiveModel& model);

/// Pooled empirical distribution of a stage penalty.
class EmpiricalDistribution {
public:
    EmpiricalDistribution() = default;
    explicit EmpiricalDistribution(std::vector<double> samples);

    std::size_t size() const { return sorted_.size(); }
    double mean() const;
    /// P(X > tau).
    double tail_prob(double tau) const;
    /// P(X <= tau).
    double cdf(double tau) const { return 1.0 - tail_prob(tau); }
    /// Empirical p-quantile (lower).
    double quantile(double p) const;
    /// (threshold, probability) pairs at `points` thresholds spaced evenly between min and max.
    std::vector<std::pair<double, double>> cdf_table(int points) const;
    const std::vector<double>& sorted() const { return sorted_; }

private:
    std::vector<double> sorted_;
};

struct EnsembleStats {
    Estimate total_cost;
    EmpiricalDistribution state_penalty; ///< pooled over t = 1..N and rollouts
    EmpiricalDistribution input_penalty; ///< pooled over t = 0..N-1 and rollouts
    std::optional<Estimate> predictive_variance;
    std::optional<SimulationTrace> first_trace;
};

struct EnsembleOptions {
    /// When set, Σ Δ_t² is accumulated against this model.
    std::optional<PredictiveModel> model;
    bool keep_first_trace = false;
    bool pool_penalties = true;
};

struct EnsembleEntry {
    std::optional<EnsembleStats> stats;
    std::string error; ///< divergence message when the controller failed
};

/// Rollout i of every controller uses seed base_seed + i (common random numbers).
std::map<std::string, EnsembleEntry> ensemble(const LinearSystem& system, const CostSpec& cost,
                                              std::span<const Controller> controllers, const NoiseSpec& process,
                                              const std::optional<NoiseSpec>& measurement, const Vector& x0, int N,
                                              long n_rollouts, std::uint64_t base_seed,
                                              const EnsembleOptions& options = {});

} // namespace ralq::sim
