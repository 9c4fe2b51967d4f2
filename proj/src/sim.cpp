#include "ralq/sim.hpp"

#include "ralq/error.hpp"
#include "ralq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ralq::sim {

Controller Controller::from_lqr(std::string id, const lqr::GainSchedule& schedule) {
    return Controller{std::move(id), StateFeedbackLaw{schedule.K, schedule.l}};
}

Controller Controller::constant(std::string id, const Matrix& K, const Vector& l, int N) {
    if (N < 1) throw Error(ErrorCategory::Configuration, "horizon must be >= 1");
    StateFeedbackLaw law;
    law.K.assign(static_cast<std::size_t>(N), K);
    law.l.assign(static_cast<std::size_t>(N), l);
    return Controller{std::move(id), std::move(law)};
}

Controller Controller::from_lqg(std::string id, const lqg::KalmanSchedule& kalman,
                                const lqg::LqgGainSchedule& schedule, const Vector& wbar) {
    return Controller{std::move(id), FilteredLaw{kalman, schedule.K, schedule.l, wbar}};
}

Controller Controller::from_leqg(std::string id, const baselines::LeqgGains& gains, const Matrix& Q,
                                 const Vector& wbar) {
    if (!gains.completed()) throw BreakdownError("cannot simulate a broken-down exponential-cost recursion", gains.valid_up_to);
    if (!gains.mode.partially_observed()) return Controller{std::move(id), StateFeedbackLaw{gains.K, gains.l}};
    return Controller{std::move(id), LeqgOutputLaw{gains, Q, wbar}};
}

int Controller::horizon() const {
    return std::visit(
        [](const auto& law) -> int {
            using T = std::decay_t<decltype(law)>;
            if constexpr (std::is_same_v<T, LeqgOutputLaw>)
                return law.gains.horizon();
            else
                return static_cast<int>(law.K.size());
        },
        law);
}

bool Controller::needs_measurements() const { return !std::holds_alternative<StateFeedbackLaw>(law); }

namespace {

struct Samplers {
    NoiseSampler process;
    std::optional<NoiseSampler> measurement;
};

Samplers make_samplers(const LinearSystem& system, const NoiseSpec& process,
                       const std::optional<NoiseSpec>& measurement) {
    if (process.dim() != system.n()) structural_error("process noise dimension must equal n");
    Samplers s{NoiseSampler(process), std::nullopt};
    if (measurement) {
        if (measurement->dim() != system.m()) structural_error("measurement noise dimension must equal m");
        s.measurement.emplace(*measurement);
    }
    return s;
}

void check_finite(const Vector& v, int t, const std::string& what) {
    if (!v.allFinite())
        throw DivergenceError(what + " became non-finite at t = " + std::to_string(t), t);
}

SimulationTrace run(const LinearSystem& system, const CostSpec& cost, const Controller& controller,
                    const Samplers& samplers, const Vector& x0, int N, std::uint64_t seed) {
    if (N < 1) throw Error(ErrorCategory::Configuration, "horizon must be >= 1");
    if (controller.horizon() < N) structural_error("controller horizon shorter than the simulation horizon");
    if (x0.size() != system.n()) structural_error("x0 must have the state dimension");
    const bool observed = controller.needs_measurements();
    if (observed && !samplers.measurement)
        throw Error(ErrorCategory::Configuration, "controller '" + controller.id + "' needs measurement noise");

    const int n = system.n(), p = system.p(), m = system.m();
    const Matrix& A = system.A();
    const Matrix& B = system.B();
    const Matrix& C = system.C();
    SimulationTrace tr;
    tr.seed = seed;
    tr.controller_id = controller.id;
    tr.states.resize(n, N + 1);
    tr.inputs.resize(p, N);
    tr.process_noise.resize(n, N);
    tr.state_penalty.resize(N + 1);
    tr.input_penalty.resize(N);
    if (observed) {
        tr.outputs.resize(m, N);
        tr.measurement_noise.resize(m, N);
        tr.xhat_pred.resize(n, N + 1);
        tr.xhat_post.resize(n, N);
    }

    Vector x = x0;
    Vector xpred = x0; // prior mean of x_0
    tr.states.col(0) = x;
    for (int t = 0; t < N; ++t) {
        const auto ut = static_cast<std::size_t>(t);
        Vector u;
        if (!observed) {
            const auto& law = std::get<StateFeedbackLaw>(controller.law);
            u = law.K[ut] * x + law.l[ut];
        } else {
            const Vector v = samplers.measurement->draw(seed, static_cast<std::uint64_t>(t),
                                                        static_cast<std::uint64_t>(Channel::Measurement));
            const Vector y = C * x + v;
            tr.measurement_noise.col(t) = v;
            tr.outputs.col(t) = y;
            tr.xhat_pred.col(t) = xpred;
            Vector xpost;
            if (const auto* f = std::get_if<FilteredLaw>(&controller.law)) {
                xpost = lqg::filter_correct(system, f->kalman, xpred, y, t);
                u = f->K[ut] * xpost + f->l[ut];
            } else {
                const auto& e = std::get<LeqgOutputLaw>(controller.law);
                const auto& g = e.gains;
                const Matrix& S = *g.mode.S;
                const Vector innov = C.transpose() * S.ldlt().solve(y - C * xpred);
                xpost = xpred + g.Ptilde[ut] * (innov + g.theta * e.Q * xpred);
                u = g.K[ut] * (g.coupling[ut] * xpost) + g.l[ut];
            }
            tr.xhat_post.col(t) = xpost;
            const Vector wbar = std::holds_alternative<FilteredLaw>(controller.law)
                                    ? std::get<FilteredLaw>(controller.law).wbar
                                    : std::get<LeqgOutputLaw>(controller.law).wbar;
            xpred = A * xpost + B * u + wbar;
            check_finite(xpred, t + 1, "state estimate");
        }
        check_finite(u, t, "input");
        const Vector w = samplers.process.draw(seed, static_cast<std::uint64_t>(t) + 1,
                                               static_cast<std::uint64_t>(Channel::Process));
        tr.process_noise.col(t) = w;
        tr.inputs.col(t) = u;
        tr.input_penalty(t) = u.dot(cost.R() * u);
        tr.state_penalty(t) = x.dot(cost.Q() * x);
        x = A * x + B * u + w;
        check_finite(x, t + 1, "state");
        tr.states.col(t + 1) = x;
    }
    tr.state_penalty(N) = x.dot(cost.Q() * x);
    if (observed) tr.xhat_pred.col(N) = xpred;
    return tr;
}

} // namespace

SimulationTrace rollout(const LinearSystem& system, const CostSpec& cost, const Controller& controller,
                        const NoiseSpec& process, const std::optional<NoiseSpec>& measurement, const Vector& x0,
                        int N, std::uint64_t seed) {
    return run(system, cost, controller, make_samplers(system, process, measurement), x0, N, seed);
}

PredictiveVarianceAccumulator::PredictiveVarianceAccumulator(LinearSystem system, CostSpec cost,
                                                             PredictiveModel model)
    : system_(std::move(system)), cost_(std::move(cost)), model_(std::move(model)) {}

void PredictiveVarianceAccumulator::add(const SimulationTrace& trace) {
    const Matrix& Q = cost_.Q();
    const int N = trace.horizon();
    double total = 0.0;
    if (const auto* fo = std::get_if<FullyObservedModel>(&model_)) {
        const double trQW = (Q * fo->W).trace();
        for (int t = 1; t <= N; ++t) {
            const Vector xhat =
                system_.A() * trace.states.col(t - 1) + system_.B() * trace.inputs.col(t - 1) + fo->wbar;
            const Vector x = trace.states.col(t);
            const double delta = x.dot(Q * x) - xhat.dot(Q * xhat) - trQW;
            total += delta * delta;
        }
    } else {
        const auto& kalman = std::get<FilteredModel>(model_).kalman;
        if (!trace.has_estimates())
            throw Error(ErrorCategory::Configuration, "trace has no filter estimates for the filtered model");
        if (kalman.horizon() < N) structural_error("Kalman schedule shorter than the trace");
        for (int t = 1; t <= N; ++t) {
            const Vector xhat = trace.xhat_pred.col(t);
            const Vector x = trace.states.col(t);
            const double delta =
                x.dot(Q * x) - xhat.dot(Q * xhat) - (Q * kalman.Wt[static_cast<std::size_t>(t)]).trace();
            total += delta * delta;
        }
    }
    ++count_;
    const double d = total - mean_;
    mean_ += d / static_cast<double>(count_);
    m2_ += d * (total - mean_);
}

Estimate PredictiveVarianceAccumulator::result() const {
    Estimate e;
    e.samples = count_;
    e.value = mean_;
    e.std_error = count_ > 1 ? std::sqrt(m2_ / static_cast<double>(count_ - 1) / static_cast<double>(count_)) : 0.0;
    return e;
}

Estimate estimate_predictive_variance(std::span<const SimulationTrace> traces, const LinearSystem& system,
                                      const CostSpec& cost, const PredictiveModel& model) {
    PredictiveVarianceAccumulator acc(system, cost, model);
    for (const auto& tr : traces) acc.add(tr);
    return acc.result();
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples) : sorted_(std::move(samples)) {
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalDistribution::mean() const {
    if (sorted_.empty()) return 0.0;
    double s = 0.0;
    for (double v : sorted_) s += v;
    return s / static_cast<double>(sorted_.size());
}

double EmpiricalDistribution::tail_prob(double tau) const {
    if (sorted_.empty()) return 0.0;
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), tau);
    return static_cast<double>(sorted_.end() - it) / static_cast<double>(sorted_.size());
}

double EmpiricalDistribution::quantile(double p) const {
    if (sorted_.empty()) throw Error(ErrorCategory::Configuration, "quantile of an empty sample");
    p = std::clamp(p, 0.0, 1.0);
    const auto n = sorted_.size();
    auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    idx = idx == 0 ? 0 : idx - 1;
    return sorted_[std::min(idx, n - 1)];
}

std::vector<std::pair<double, double>> EmpiricalDistribution::cdf_table(int points) const {
    std::vector<std::pair<double, double>> out;
    if (sorted_.empty() || points < 1) return out;
    const double lo = sorted_.front(), hi = sorted_.back();
    for (int i = 0; i < points; ++i) {
        const double tau = points == 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        out.emplace_back(tau, cdf(tau));
    }
    return out;
}

std::map<std::string, EnsembleEntry> ensemble(const LinearSystem& system, const CostSpec& cost,
                                              std::span<const Controller> controllers, const NoiseSpec& process,
                                              const std::optional<NoiseSpec>& measurement, const Vector& x0, int N,
                                              long n_rollouts, std::uint64_t base_seed,
                                              const EnsembleOptions& options) {
    if (n_rollouts < 1) throw Error(ErrorCategory::Configuration, "n_rollouts must be >= 1");
    const auto samplers = make_samplers(system, process, measurement);
    std::map<std::string, EnsembleEntry> out;
    for (const auto& c : controllers) {
        EnsembleEntry entry;
        try {
            EnsembleStats stats;
            std::optional<PredictiveVarianceAccumulator> acc;
            if (options.model) acc.emplace(system, cost, *options.model);
            std::vector<double> xs, us;
            double mean = 0.0, m2 = 0.0;
            for (long i = 0; i < n_rollouts; ++i) {
                auto tr = run(system, cost, c, samplers, x0, N, base_seed + static_cast<std::uint64_t>(i));
                const double total = tr.total_cost();
                const double d = total - mean;
                mean += d / static_cast<double>(i + 1);
                m2 += d * (total - mean);
                if (options.pool_penalties) {
                    for (int t = 1; t <= N; ++t) xs.push_back(tr.state_penalty(t));
                    for (int t = 0; t < N; ++t) us.push_back(tr.input_penalty(t));
                }
                if (acc) acc->add(tr);
                if (i == 0 && options.keep_first_trace) stats.first_trace = std::move(tr);
            }
            stats.total_cost.value = mean;
            stats.total_cost.samples = n_rollouts;
            stats.total_cost.std_error =
                n_rollouts > 1 ? std::sqrt(m2 / static_cast<double>(n_rollouts - 1) / static_cast<double>(n_rollouts))
                               : 0.0;
            stats.state_penalty = EmpiricalDistribution(std::move(xs));
            stats.input_penalty = EmpiricalDistribution(std::move(us));
            if (acc) stats.predictive_variance = acc->result();
            entry.stats = std::move(stats);
        } catch (const DivergenceError& e) {
            entry.error = e.what();
        }
        out[c.id] = std::move(entry);
    }
    return out;
}

} // namespace ralq::sim
